#include "wvfusion/synth_data.hpp"

#include "wvfusion/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace wvfusion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kStreamRssi = 1;
constexpr std::uint64_t kStreamPhotos = 2;
constexpr std::uint64_t kStreamTest = 3;
constexpr std::uint64_t kStreamTexture = 4;

// Procedural 360-degree panorama. Intensity is a sum of angular-vertical
// sinusoids plus a few vertical slabs ("doors", "pillars").
struct Panorama {
  struct Wave {
    int angular_freq;
    double vertical_freq, amplitude, phase;
  };
  struct Slab {
    double centre_deg, half_width_deg, top, bottom, delta;
  };

  double base = 0.5;
  std::vector<Wave> waves;
  std::vector<Slab> slabs;

  explicit Panorama(std::uint64_t seed) {
    Rng rng(seed);
    base = rng.uniform(0.35, 0.65);
    for (int i = 0; i < 5; ++i)
      waves.push_back({1 + static_cast<int>(rng.uniform_int(6)), rng.uniform(0.0, 2.5), rng.uniform(0.06, 0.16),
                       rng.uniform(0.0, 2.0 * std::numbers::pi)});
    for (int i = 0; i < 4; ++i) {
      const double top = rng.uniform(0.0, 0.5);
      slabs.push_back({rng.uniform(0.0, 360.0), rng.uniform(3.0, 12.0), top, rng.uniform(top + 0.3, 1.0),
                       rng.uniform(-0.35, 0.35)});
    }
  }

  double at(double angle_deg, double v) const {
    const double theta = angle_deg * std::numbers::pi / 180.0;
    double value = base;
    for (const Wave& w : waves)
      value += w.amplitude * std::cos(w.angular_freq * theta + 2.0 * std::numbers::pi * w.vertical_freq * v + w.phase);
    for (const Slab& s : slabs) {
      const double diff = std::abs(std::remainder(angle_deg - s.centre_deg, 360.0));
      if (diff <= s.half_width_deg && v >= s.top && v <= s.bottom) value += s.delta;
    }
    return value;
  }
};

Point2 point_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(field, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& field_prefix) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field_prefix + key, "has the wrong type");
  }
}

}  // namespace

void ApConfig::validate() const {
  if (!(path_loss_exponent >= 1.5 && path_loss_exponent <= 6.0))
    throw ConfigError("path_loss_exponent", fmt::format("{} outside [1.5, 6]", path_loss_exponent));
  if (!(shadowing_sigma_db >= 0.0 && shadowing_sigma_db <= 12.0))
    throw ConfigError("shadowing_sigma_db", fmt::format("{} outside [0, 12]", shadowing_sigma_db));
  if (!std::isfinite(tx_power_dbm)) throw ConfigError("tx_power_dbm", "must be finite");
}

SceneConfig SceneConfig::make(int num_cells, std::vector<std::pair<int, int>> aliasing_pairs, std::uint64_t seed,
                              double noise_sigma, int image_size) {
  SceneConfig scene;
  for (int label = 0; label < num_cells; ++label)
    scene.texture_seed_per_cell[label] = derive_seed(seed, kStreamTexture, static_cast<std::uint64_t>(label));
  for (const auto& [a, b] : aliasing_pairs)
    if (scene.texture_seed_per_cell.contains(a)) scene.texture_seed_per_cell[b] = scene.texture_seed_per_cell[a];
  scene.aliasing_pairs = std::move(aliasing_pairs);
  scene.noise_sigma = noise_sigma;
  scene.image_size = image_size;
  return scene;
}

std::uint64_t SceneConfig::texture_seed(int label) const {
  const auto it = texture_seed_per_cell.find(label);
  if (it == texture_seed_per_cell.end()) throw RangeError(fmt::format("no texture seed for cell {}", label));
  return it->second;
}

void SceneConfig::validate(int num_cells) const {
  for (std::size_t i = 0; i < aliasing_pairs.size(); ++i) {
    const auto& [a, b] = aliasing_pairs[i];
    const std::string field = fmt::format("scene.aliasing_pairs[{}]", i);
    if (a == b) throw ConfigError(field, "aliasing pair needs two distinct labels");
    if (a < 0 || b < 0 || a >= num_cells || b >= num_cells) throw ConfigError(field, "label outside the grid");
  }
  for (int label = 0; label < num_cells; ++label)
    if (!texture_seed_per_cell.contains(label))
      throw ConfigError("scene.texture_seeds", fmt::format("missing seed for cell {}", label));
  if (!(noise_sigma >= 0.0)) throw ConfigError("scene.noise_sigma", "must be >= 0");
  if (image_size < 8) throw ConfigError("scene.image_size", "must be >= 8");
  if (!(field_of_view_deg > 0.0 && field_of_view_deg <= 360.0))
    throw ConfigError("scene.field_of_view_deg", "must lie in (0, 360]");
}

double CollectionPlan::heading(int group, int s) const {
  const int stride = photos_per_position / photos_per_group;
  return std::fmod(((group + s * stride) % photos_per_position) * rotation_step_deg, 360.0);
}

void CollectionPlan::validate() const {
  if (rssi_group_size < 2) throw ConfigError("plan.rssi_group_size", "must be >= 2");
  if (rssi_per_position < rssi_group_size || rssi_per_position % rssi_group_size != 0)
    throw ConfigError("plan.rssi_per_position", "must be a positive multiple of rssi_group_size");
  if (photos_per_group < 1) throw ConfigError("plan.photos_per_group", "must be >= 1");
  if (photos_per_position < photos_per_group || photos_per_position % photos_per_group != 0)
    throw ConfigError("plan.photos_per_position", "must be a positive multiple of photos_per_group");
  if (!(rotation_step_deg > 0.0) || rotation_step_deg * photos_per_position > 360.0 + 1e-9)
    throw ConfigError("plan.rotation_step_deg", "must be > 0 and cover at most one turn");
}

Eigen::VectorXd simulate_rssi(Point2 pos, std::span<const ApConfig> aps, Rng& rng, double power_offset_db) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(aps.size()));
  for (std::size_t k = 0; k < aps.size(); ++k) {
    const ApConfig& ap = aps[k];
    const double d = std::max(distance(pos, ap.position), kMinPathDistance);
    const double noise = ap.shadowing_sigma_db > 0.0 ? rng.normal(0.0, ap.shadowing_sigma_db) : 0.0;
    const double rssi = ap.tx_power_dbm + power_offset_db - 10.0 * ap.path_loss_exponent * std::log10(d) + noise;
    out[static_cast<Eigen::Index>(k)] = rssi < kRssiFloorDbm ? kMissingRssiDbm : rssi;
  }
  return out;
}

Eigen::MatrixXd render_view(Point2 pos, double heading_deg, const SceneConfig& scene, const CellGrid& grid, Rng& rng,
                            double rotation_step_deg, double brightness_shift) {
  const int label = grid.point_to_label(pos);
  const Panorama pano(scene.texture_seed(label));
  const double heading = std::round(heading_deg / rotation_step_deg) * rotation_step_deg;
  const int n = scene.image_size;
  Eigen::MatrixXd img(n, n);
  for (int r = 0; r < n; ++r) {
    const double v = (r + 0.5) / n;
    for (int c = 0; c < n; ++c) {
      const double angle = heading + ((c + 0.5) / n - 0.5) * scene.field_of_view_deg;
      double value = pano.at(angle, v) + brightness_shift;
      if (scene.noise_sigma > 0.0) value += rng.normal(0.0, scene.noise_sigma);
      img(r, c) = std::clamp(value, 0.0, 1.0);
    }
  }
  return img;
}

std::vector<RssiBlock> PositionCollection::rssi_groups(const CollectionPlan& plan,
                                                       const std::vector<std::string>& ap_ids) const {
  std::vector<RssiBlock> groups;
  for (int g = 0; g < plan.rssi_groups(); ++g)
    groups.emplace_back(rssi.middleRows(static_cast<Eigen::Index>(g) * plan.rssi_group_size, plan.rssi_group_size),
                        ap_ids, false);
  return groups;
}

std::vector<ImageGroup> PositionCollection::photo_groups(const CollectionPlan& plan) const {
  const int stride = plan.photos_per_position / plan.photos_per_group;
  std::vector<ImageGroup> groups;
  for (int g = 0; g < plan.photo_groups(); ++g) {
    std::vector<Eigen::MatrixXd> imgs;
    std::vector<double> headings;
    for (int s = 0; s < plan.photos_per_group; ++s) {
      const auto idx = static_cast<std::size_t>((g + s * stride) % plan.photos_per_position);
      imgs.push_back(photos[idx]);
      headings.push_back(plan.heading(g, s));
    }
    groups.emplace_back(std::move(imgs), std::move(headings));
  }
  return groups;
}

PositionCollection collect_position(int label, const CollectionPlan& plan, std::span<const ApConfig> aps,
                                    const SceneConfig& scene, const CellGrid& grid, Rng& rng) {
  plan.validate();
  const Point2 pos = grid.label_to_centre(label);
  PositionCollection out;
  Rng rssi_rng = rng.split(kStreamRssi, static_cast<std::uint64_t>(label));
  out.rssi.resize(plan.rssi_per_position, static_cast<Eigen::Index>(aps.size()));
  for (int i = 0; i < plan.rssi_per_position; ++i) out.rssi.row(i) = simulate_rssi(pos, aps, rssi_rng).transpose();
  Rng photo_rng = rng.split(kStreamPhotos, static_cast<std::uint64_t>(label));
  for (int p = 0; p < plan.photos_per_position; ++p) {
    const double heading = std::fmod(p * plan.rotation_step_deg, 360.0);
    out.headings.push_back(heading);
    out.photos.push_back(render_view(pos, heading, scene, grid, photo_rng, plan.rotation_step_deg));
  }
  return out;
}

std::vector<Sample> associate(std::span<const RssiBlock> rssi_groups, std::span<const ImageGroup> photo_groups,
                              AssociationMode mode, int label, Point2 truth) {
  std::vector<Sample> samples;
  for (const auto& [w, i] : association_pairs(static_cast<int>(rssi_groups.size()),
                                              static_cast<int>(photo_groups.size()), mode))
    samples.push_back({label, rssi_groups[static_cast<std::size_t>(w)], photo_groups[static_cast<std::size_t>(i)],
                       truth.x, truth.y});
  return samples;
}

std::vector<TrajectoryPoint> generate_trajectory(const CellGrid& grid, std::span<const Point2> waypoints, double step) {
  if (waypoints.empty()) throw InputError("trajectory needs at least one waypoint");
  if (!(step > 0.0)) throw InputError("trajectory step must be > 0");
  for (const Point2& w : waypoints)
    if (!grid.contains(w)) throw OutOfMapError(fmt::format("waypoint ({}, {}) is outside the map", w.x, w.y));
  std::vector<TrajectoryPoint> out;
  auto emit = [&](Point2 p) { out.push_back({p, grid.point_to_label(p)}); };
  emit(waypoints.front());
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const Point2 a = waypoints[i - 1];
    const Point2 b = waypoints[i];
    const double len = distance(a, b);
    // Points at multiples of `step` along the segment; the endpoint is always emitted.
    const auto n = static_cast<int>(std::floor(len / step + 1e-9));
    for (int j = 1; j <= n; ++j) {
      const double t = j * step / len;
      if (t >= 1.0 - 1e-12) break;
      emit({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    if (len > 0.0) emit(b);
  }
  return out;
}

CellGrid GeneratorConfig::make_grid() const {
  return CellGrid::regular(grid.rows, grid.cols, grid.cell_width, grid.cell_height, grid.origin_x, grid.origin_y);
}

void GeneratorConfig::validate() const {
  if (grid.rows < 1) throw ConfigError("grid.rows", "must be >= 1");
  if (grid.cols < 1) throw ConfigError("grid.cols", "must be >= 1");
  if (grid.rows * grid.cols < 2) throw ConfigError("grid", "needs at least 2 cells");
  if (!(grid.cell_width > 0.0)) throw ConfigError("grid.cell_width", "must be > 0");
  if (!(grid.cell_height > 0.0)) throw ConfigError("grid.cell_height", "must be > 0");
  if (aps.size() < 2) throw ConfigError("aps", "need at least 2 access points");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    try {
      aps[i].validate();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("aps[{}].{}", i, e.field()), e.what());
    }
    if (aps[i].id.empty() || !ids.insert(aps[i].id).second)
      throw ConfigError(fmt::format("aps[{}].id", i), "ids must be non-empty and unique");
  }
  const int n = grid.rows * grid.cols;
  scene.validate(n);
  plan.validate();
  if (!(test_step > 0.0)) throw ConfigError("test.step", "must be > 0");
  const CellGrid g = make_grid();
  for (std::size_t i = 0; i < test_waypoints.size(); ++i)
    if (!g.contains(test_waypoints[i])) throw ConfigError(fmt::format("test.waypoints[{}]", i), "outside the map");
}

GeneratorConfig GeneratorConfig::benchmark(std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  // Four APs beyond each end of the floor at mid-height. Their -95 dBm contours
  // cross the floor near x = 2, 4, 6 and 8 m, so WiFi resolves position along x
  // but hardly along y.
  c.aps = {
      {"ap0", {-3.0, 5.0}, -70.5, 3.5, 3.0},
      {"ap1", {-3.0, 5.0}, -65.4, 3.5, 3.0},
      {"ap2", {-3.0, 5.0}, -61.6, 3.5, 3.0},
      {"ap3", {-3.0, 5.0}, -58.6, 3.5, 3.0},
      {"ap4", {13.0, 5.0}, -70.5, 3.5, 3.0},
      {"ap5", {13.0, 5.0}, -65.4, 3.5, 3.0},
      {"ap6", {13.0, 5.0}, -61.6, 3.5, 3.0},
      {"ap7", {13.0, 5.0}, -58.6, 3.5, 3.0},
  };
  c.scene = SceneConfig::make(c.grid.rows * c.grid.cols, {{0, 4}, {10, 14}, {15, 19}, {20, 24}}, seed);
  c.test_waypoints = {{0.4, 0.7}, {9.6, 0.7}, {9.6, 2.9}, {0.4, 2.9}, {0.4, 5.3},
                      {9.6, 5.3}, {9.6, 7.2}, {0.4, 7.2}, {0.4, 9.4}, {9.6, 9.4}};
  return c;
}

json GeneratorConfig::to_json() const {
  json aps_j = json::array();
  for (const ApConfig& ap : aps)
    aps_j.push_back({{"id", ap.id},
                     {"x", ap.position.x},
                     {"y", ap.position.y},
                     {"tx_power_dbm", ap.tx_power_dbm},
                     {"path_loss_exponent", ap.path_loss_exponent},
                     {"shadowing_sigma_db", ap.shadowing_sigma_db}});
  json seeds = json::object();
  for (const auto& [label, s] : scene.texture_seed_per_cell) seeds[std::to_string(label)] = s;
  json pairs = json::array();
  for (const auto& [a, b] : scene.aliasing_pairs) pairs.push_back({a, b});
  json wps = json::array();
  for (const Point2& p : test_waypoints) wps.push_back({p.x, p.y});
  return {{"seed", seed},
          {"grid",
           {{"rows", grid.rows},
            {"cols", grid.cols},
            {"cell_width", grid.cell_width},
            {"cell_height", grid.cell_height},
            {"origin_x", grid.origin_x},
            {"origin_y", grid.origin_y}}},
          {"aps", aps_j},
          {"scene",
           {{"texture_seeds", seeds},
            {"aliasing_pairs", pairs},
            {"noise_sigma", scene.noise_sigma},
            {"image_size", scene.image_size},
            {"field_of_view_deg", scene.field_of_view_deg}}},
          {"plan",
           {{"rssi_per_position", plan.rssi_per_position},
            {"photos_per_position", plan.photos_per_position},
            {"rssi_group_size", plan.rssi_group_size},
            {"photos_per_group", plan.photos_per_group},
            {"rotation_step_deg", plan.rotation_step_deg}}},
          {"association", std::string(to_string(association))},
          {"test", {{"waypoints", wps}, {"step", test_step}}},
          {"drift",
           {{"enabled", drift.enabled},
            {"ap_power_offset_db", drift.ap_power_offset_db},
            {"brightness_shift", drift.brightness_shift}}}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "generator config must be a JSON object");
  GeneratorConfig c = benchmark(get_or<std::uint64_t>(j, "seed", 1, ""));
  if (j.contains("grid")) {
    const json& g = j["grid"];
    c.grid.rows = get_or(g, "rows", c.grid.rows, "grid.");
    c.grid.cols = get_or(g, "cols", c.grid.cols, "grid.");
    c.grid.cell_width = get_or(g, "cell_width", c.grid.cell_width, "grid.");
    c.grid.cell_height = get_or(g, "cell_height", c.grid.cell_height, "grid.");
    c.grid.origin_x = get_or(g, "origin_x", c.grid.origin_x, "grid.");
    c.grid.origin_y = get_or(g, "origin_y", c.grid.origin_y, "grid.");
  }
  if (j.contains("aps")) {
    if (!j["aps"].is_array()) throw ConfigError("aps", "must be an array");
    c.aps.clear();
    for (std::size_t i = 0; i < j["aps"].size(); ++i) {
      const json& a = j["aps"][i];
      const std::string prefix = fmt::format("aps[{}].", i);
      for (const char* key : {"id", "x", "y", "tx_power_dbm", "path_loss_exponent", "shadowing_sigma_db"})
        if (!a.contains(key)) throw ConfigError(prefix + key, "is required");
      c.aps.push_back({get_or<std::string>(a, "id", "", prefix),
                       {get_or(a, "x", 0.0, prefix), get_or(a, "y", 0.0, prefix)},
                       get_or(a, "tx_power_dbm", 0.0, prefix),
                       get_or(a, "path_loss_exponent", 0.0, prefix),
                       get_or(a, "shadowing_sigma_db", 0.0, prefix)});
    }
  }
  const int n = c.grid.rows * c.grid.cols;
  std::vector<std::pair<int, int>> pairs = c.scene.aliasing_pairs;
  double noise = c.scene.noise_sigma;
  int image_size = c.scene.image_size;
  double fov = c.scene.field_of_view_deg;
  json seeds = json::object();
  if (j.contains("scene")) {
    const json& s = j["scene"];
    if (s.contains("aliasing_pairs")) {
      pairs.clear();
      for (std::size_t i = 0; i < s["aliasing_pairs"].size(); ++i) {
        const json& p = s["aliasing_pairs"][i];
        if (!p.is_array() || p.size() != 2)
          throw ConfigError(fmt::format("scene.aliasing_pairs[{}]", i), "expected [label_a, label_b]");
        pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
    }
    noise = get_or(s, "noise_sigma", noise, "scene.");
    image_size = get_or(s, "image_size", image_size, "scene.");
    fov = get_or(s, "field_of_view_deg", fov, "scene.");
    if (s.contains("texture_seeds")) seeds = s["texture_seeds"];
  }
  c.scene = SceneConfig::make(n, pairs, c.seed, noise, image_size);
  c.scene.field_of_view_deg = fov;
  for (const auto& [key, value] : seeds.items()) {
    try {
      c.scene.texture_seed_per_cell[std::stoi(key)] = value.get<std::uint64_t>();
    } catch (const std::exception&) {
      throw ConfigError("scene.texture_seeds." + key, "expected integer label -> integer seed");
    }
  }
  if (j.contains("plan")) {
    const json& p = j["plan"];
    c.plan.rssi_per_position = get_or(p, "rssi_per_position", c.plan.rssi_per_position, "plan.");
    c.plan.photos_per_position = get_or(p, "photos_per_position", c.plan.photos_per_position, "plan.");
    c.plan.rssi_group_size = get_or(p, "rssi_group_size", c.plan.rssi_group_size, "plan.");
    c.plan.photos_per_group = get_or(p, "photos_per_group", c.plan.photos_per_group, "plan.");
    c.plan.rotation_step_deg = get_or(p, "rotation_step_deg", c.plan.rotation_step_deg, "plan.");
  }
  if (j.contains("association")) {
    const auto mode = parse_association_mode(get_or<std::string>(j, "association", "", ""));
    if (!mode) throw ConfigError("association", "must be 'diagonal' or 'full'");
    c.association = *mode;
  }
  if (j.contains("test")) {
    const json& t = j["test"];
    if (t.contains("waypoints")) {
      c.test_waypoints.clear();
      for (std::size_t i = 0; i < t["waypoints"].size(); ++i)
        c.test_waypoints.push_back(point_from_json(t["waypoints"][i], fmt::format("test.waypoints[{}]", i)));
    }
    c.test_step = get_or(t, "step", c.test_step, "test.");
  }
  if (j.contains("drift")) {
    const json& d = j["drift"];
    c.drift.enabled = get_or(d, "enabled", c.drift.enabled, "drift.");
    c.drift.ap_power_offset_db = get_or(d, "ap_power_offset_db", c.drift.ap_power_offset_db, "drift.");
    c.drift.brightness_shift = get_or(d, "brightness_shift", c.drift.brightness_shift, "drift.");
  }
  c.validate();
  return c;
}

GeneratorConfig GeneratorConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open generator config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", fmt::format("invalid JSON: {}", e.what()));
  }
  return from_json(j);
}

void generate_dataset(const GeneratorConfig& config, const fs::path& out_dir) {
  config.validate();
  const CellGrid grid = config.make_grid();
  std::vector<std::string> ap_ids;
  for (const ApConfig& ap : config.aps) ap_ids.push_back(ap.id);

  fs::create_directories(out_dir);
  fs::remove_all(out_dir / "cells");
  fs::remove_all(out_dir / "test");

  const Rng root(config.seed);
  for (int label = 0; label < grid.size(); ++label) {
    Rng rng = root.split(0, static_cast<std::uint64_t>(label));
    const PositionCollection pc = collect_position(label, config.plan, config.aps, config.scene, grid, rng);
    const fs::path cdir = out_dir / "cells" / std::to_string(label);
    fs::create_directories(cdir);
    const std::vector<RssiBlock> rg = pc.rssi_groups(config.plan, ap_ids);
    for (std::size_t g = 0; g < rg.size(); ++g) write_matrix_csv(cdir / fmt::format("rssi_{}.csv", g), rg[g].values());
    const std::vector<ImageGroup> pg = pc.photo_groups(config.plan);
    for (std::size_t g = 0; g < pg.size(); ++g)
      for (int s = 0; s < pg[g].size(); ++s)
        write_pgm(cdir / fmt::format("img_{}_{}.pgm", g, s), pg[g].images()[static_cast<std::size_t>(s)]);
  }

  std::vector<TrajectoryPoint> trajectory;
  if (!config.test_waypoints.empty()) trajectory = generate_trajectory(grid, config.test_waypoints, config.test_step);
  const fs::path tdir = out_dir / "test";
  fs::create_directories(tdir);
  std::ofstream traj(tdir / "trajectory.csv", std::ios::binary);
  traj << "index,x,y,label,photo_group\n";
  const double power_offset = config.drift.enabled ? config.drift.ap_power_offset_db : 0.0;
  const double brightness = config.drift.enabled ? config.drift.brightness_shift : 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const TrajectoryPoint& tp = trajectory[i];
    Rng rng = root.split(kStreamTest, i);
    Eigen::MatrixXd block(config.plan.rssi_group_size, static_cast<Eigen::Index>(config.aps.size()));
    for (int m = 0; m < config.plan.rssi_group_size; ++m)
      block.row(m) = simulate_rssi(tp.position, config.aps, rng, power_offset).transpose();
    write_matrix_csv(tdir / fmt::format("rssi_{}.csv", i), block);
    const int group = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(config.plan.photo_groups())));
    for (int s = 0; s < config.plan.photos_per_group; ++s) {
      const Eigen::MatrixXd img = render_view(tp.position, config.plan.heading(group, s), config.scene, grid, rng,
                                              config.plan.rotation_step_deg, brightness);
      write_pgm(tdir / fmt::format("img_{}_{}.pgm", i, s), img);
    }
    traj << fmt::format("{},{},{},{},{}\n", i, tp.position.x, tp.position.y, tp.label, group);
  }

  DatasetManifest m;
  m.num_cells = grid.size();
  m.samples_per_block = config.plan.rssi_group_size;
  m.access_points = static_cast<int>(config.aps.size());
  m.images_per_group = config.plan.photos_per_group;
  m.image_size = config.scene.image_size;
  m.seed = config.seed;
  m.rng = Rng::kName;
  m.ap_ids = ap_ids;
  m.cells = grid.cells();
  m.rssi_groups = config.plan.rssi_groups();
  m.photo_groups = config.plan.photo_groups();
  m.association = config.association;
  m.test_points = static_cast<int>(trajectory.size());
  m.generator = config.to_json();
  write_manifest(out_dir, m);
}

}  // namespace wvfusion
