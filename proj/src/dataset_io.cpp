#include "wvfusion/dataset_io.hpp"

#include "wvfusion/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wvfusion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "wvfusion-dataset";
constexpr int kManifestVersion = 1;

std::vector<double> parse_csv_row(const std::string& line, const fs::path& path, int line_no) {
  std::vector<double> row;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t end = std::min(line.find(',', start), line.size());
    std::string_view field(line.data() + start, end - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      throw DatasetError(fmt::format("{}:{}: malformed number '{}'", path.string(), line_no, field));
    row.push_back(v);
    start = end + 1;
  }
  return row;
}

fs::path cell_dir(const fs::path& dir, int label) { return dir / "cells" / std::to_string(label); }

std::vector<double> group_headings(int group, int photos, int per_group, double step) {
  std::vector<double> h;
  for (int s = 0; s < per_group; ++s) h.push_back(std::fmod(((group + s * (photos / per_group)) % photos) * step, 360.0));
  return h;
}

}  // namespace

std::string_view to_string(AssociationMode mode) { return mode == AssociationMode::full ? "full" : "diagonal"; }

std::optional<AssociationMode> parse_association_mode(std::string_view name) {
  if (name == "full") return AssociationMode::full;
  if (name == "diagonal") return AssociationMode::diagonal;
  return std::nullopt;
}

std::vector<std::pair<int, int>> association_pairs(int rssi_groups, int photo_groups, AssociationMode mode) {
  std::vector<std::pair<int, int>> pairs;
  if (mode == AssociationMode::full) {
    for (int w = 0; w < rssi_groups; ++w)
      for (int i = 0; i < photo_groups; ++i) pairs.emplace_back(w, i);
  } else {
    for (int g = 0; g < std::min(rssi_groups, photo_groups); ++g) pairs.emplace_back(g, g);
  }
  return pairs;
}

json DatasetManifest::to_json() const {
  json cells_j = json::array();
  for (const Cell& c : cells)
    cells_j.push_back({{"label", c.label},
                       {"centre_x", c.centre_x},
                       {"centre_y", c.centre_y},
                       {"half_width", c.half_width},
                       {"half_height", c.half_height}});
  return {{"format", kManifestFormat},
          {"version", kManifestVersion},
          {"N", num_cells},
          {"M", samples_per_block},
          {"K", access_points},
          {"S", images_per_group},
          {"image_size", image_size},
          {"seed", seed},
          {"rng", rng},
          {"ap_ids", ap_ids},
          {"grid", {{"cells", cells_j}}},
          {"rssi_groups", rssi_groups},
          {"photo_groups", photo_groups},
          {"association", std::string(wvfusion::to_string(association))},
          {"test_points", test_points},
          {"generator", generator}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  if (j.value("format", "") != kManifestFormat) throw DatasetError("manifest has an unknown format tag");
  if (j.value("version", 0) != kManifestVersion) throw DatasetError("unsupported manifest version");
  DatasetManifest m;
  try {
    m.num_cells = j.at("N").get<int>();
    m.samples_per_block = j.at("M").get<int>();
    m.access_points = j.at("K").get<int>();
    m.images_per_group = j.at("S").get<int>();
    m.image_size = j.at("image_size").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.rng = j.at("rng").get<std::string>();
    m.ap_ids = j.at("ap_ids").get<std::vector<std::string>>();
    for (const json& c : j.at("grid").at("cells"))
      m.cells.push_back({c.at("label").get<int>(), c.at("centre_x").get<double>(), c.at("centre_y").get<double>(),
                         c.at("half_width").get<double>(), c.at("half_height").get<double>()});
    m.rssi_groups = j.at("rssi_groups").get<int>();
    m.photo_groups = j.at("photo_groups").get<int>();
    const auto assoc = parse_association_mode(j.at("association").get<std::string>());
    if (!assoc) throw DatasetError("manifest association must be 'diagonal' or 'full'");
    m.association = *assoc;
    m.test_points = j.at("test_points").get<int>();
    m.generator = j.value("generator", json::object());
  } catch (const json::exception& e) {
    throw DatasetError(fmt::format("malformed manifest: {}", e.what()));
  }
  return m;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  std::string buf;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    buf.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) buf += ',';
      buf += fmt::format("{}", m(r, c));
    }
    buf += '\n';
    out << buf;
  }
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    rows.push_back(parse_csv_row(line, path, line_no));
    if (rows.back().size() != rows.front().size())
      throw DatasetError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), line_no,
                                     rows.front().size(), rows.back().size()));
  }
  if (rows.empty()) throw DatasetError(path.string() + ": empty matrix file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

void write_pgm(const fs::path& path, const Eigen::MatrixXd& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::string pixels(static_cast<std::size_t>(image.size()), '\0');
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c)
      pixels[i++] = static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(image(r, c), 0.0, 1.0) * 255.0)));
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
}

Eigen::MatrixXd read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w < 1 || h < 1 || maxval != 255) throw DatasetError(path.string() + ": not an 8-bit binary PGM");
  in.get();  // single whitespace after maxval
  std::string pixels(static_cast<std::size_t>(w) * h, '\0');
  in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) throw DatasetError(path.string() + ": truncated PGM");
  Eigen::MatrixXd img(h, w);
  std::size_t i = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img(r, c) = static_cast<unsigned char>(pixels[i++]) / 255.0;
  return img;
}

void write_manifest(const fs::path& dir, const DatasetManifest& manifest) {
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw DatasetError("cannot write manifest in " + dir.string());
  out << manifest.to_json().dump(2) << '\n';
}

DatasetManifest read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DatasetError("no manifest.json in " + dir.string());
  try {
    return DatasetManifest::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DatasetError(fmt::format("manifest.json is not valid JSON: {}", e.what()));
  }
}

namespace {

double rotation_step(const DatasetManifest& m) {
  if (m.generator.contains("plan")) return m.generator["plan"].value("rotation_step_deg", 360.0 / m.photo_groups);
  return 360.0 / m.photo_groups;
}

ImageGroup load_image_group(const fs::path& dir, const std::string& stem, int s_count, std::vector<double> headings) {
  std::vector<Eigen::MatrixXd> images;
  for (int s = 0; s < s_count; ++s) images.push_back(read_pgm(dir / fmt::format("img_{}_{}.pgm", stem, s)));
  return ImageGroup(std::move(images), std::move(headings));
}

}  // namespace

Dataset load_dataset(const fs::path& dir, bool with_test) {
  if (!fs::is_directory(dir)) throw DatasetError("dataset directory not found: " + dir.string());
  DatasetManifest manifest = read_manifest(dir);
  CellGrid grid(manifest.cells);
  if (grid.size() != manifest.num_cells) throw DatasetError("manifest N disagrees with its cell list");
  const double step = rotation_step(manifest);
  std::vector<CellData> cells(static_cast<std::size_t>(grid.size()));
  for (int label = 0; label < grid.size(); ++label) {
    const fs::path cdir = cell_dir(dir, label);
    CellData& cd = cells[static_cast<std::size_t>(label)];
    for (int g = 0; g < manifest.rssi_groups; ++g) {
      Eigen::MatrixXd m = read_matrix_csv(cdir / fmt::format("rssi_{}.csv", g));
      if (m.rows() != manifest.samples_per_block || m.cols() != manifest.access_points)
        throw DatasetError(fmt::format("{}: expected {}x{} RSSI block", (cdir / fmt::format("rssi_{}.csv", g)).string(),
                                       manifest.samples_per_block, manifest.access_points));
      cd.rssi_groups.emplace_back(std::move(m), manifest.ap_ids, false);
    }
    for (int g = 0; g < manifest.photo_groups; ++g)
      cd.photo_groups.push_back(load_image_group(
          cdir, std::to_string(g), manifest.images_per_group,
          group_headings(g, manifest.photo_groups, manifest.images_per_group, step)));
  }
  std::vector<Sample> test;
  if (with_test && manifest.test_points > 0) {
    const fs::path tdir = dir / "test";
    std::ifstream in(tdir / "trajectory.csv");
    if (!in) throw DatasetError("missing test/trajectory.csv");
    std::string line;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::vector<double> row = parse_csv_row(line, tdir / "trajectory.csv", line_no);
      if (row.size() != 5) throw DatasetError(fmt::format("test/trajectory.csv:{}: expected 5 fields", line_no));
      const int index = static_cast<int>(row[0]);
      const int label = static_cast<int>(row[3]);
      const int group = static_cast<int>(row[4]);
      Eigen::MatrixXd m = read_matrix_csv(tdir / fmt::format("rssi_{}.csv", index));
      Sample s{label, RssiBlock(std::move(m), manifest.ap_ids, false),
               load_image_group(tdir, std::to_string(index), manifest.images_per_group,
                                group_headings(group, manifest.photo_groups, manifest.images_per_group, step)),
               row[1], row[2]};
      s.validate(grid);
      test.push_back(std::move(s));
    }
    if (static_cast<int>(test.size()) != manifest.test_points)
      throw DatasetError(fmt::format("manifest lists {} test points, trajectory has {}", manifest.test_points, test.size()));
  }
  return Dataset{std::move(manifest), std::move(grid), std::move(cells), std::move(test)};
}

std::vector<std::string> validate_dataset(const fs::path& dir) {
  std::vector<std::string> problems;
  try {
    const Dataset ds = load_dataset(dir, true);
    const DatasetManifest& m = ds.manifest;
    if (static_cast<int>(m.ap_ids.size()) != m.access_points) problems.push_back("ap_ids length differs from K");
    if (m.samples_per_block < 2) problems.push_back("M must be >= 2");
    if (m.access_points < 2) problems.push_back("K must be >= 2");
    for (int label = 0; label < ds.grid.size(); ++label) {
      for (const ImageGroup& g : ds.cells[static_cast<std::size_t>(label)].photo_groups)
        if (g.height() != m.image_size || g.width() != m.image_size)
          problems.push_back(fmt::format("cell {}: image size differs from manifest", label));
    }
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  return problems;
}

}  // namespace wvfusion
