#include "wvfusion/pipeline.hpp"

#include "wvfusion/errors.hpp"

#include <fmt/format.h>

#include <fstream>

namespace wvfusion {

namespace fs = std::filesystem;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::wifi: return "wifi";
    case ModelKind::visual: return "visual";
    case ModelKind::joint: return "joint";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::wifi, ModelKind::visual, ModelKind::joint})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

ChannelStack wifi_channels(const RssiBlock& raw, int size) {
  ChannelStack out = extract_wifi_features(raw).channels();
  for (Eigen::MatrixXd& c : out) c = resize_nearest(c, size);
  return out;
}

ChannelStack visual_channels(const ImageGroup& images, int size) {
  ChannelStack out;
  for (const Eigen::MatrixXd& img : images.images()) out.push_back(resize_nearest(img, size));
  return out;
}

ChannelStack joint_channels(const RssiBlock& raw, const ImageGroup& images, int size) {
  const ChannelStack w = wifi_channels(raw, size);
  const WifiFeatureSet resized{w[0], w[1], w[2], w[3]};
  if (images.height() == size && images.width() == size) return stack_joint_channels(resized, images);
  return stack_joint_channels(resized, ImageGroup(visual_channels(images, size), images.headings()));
}

ChannelStack channels_for(ModelKind kind, const RssiBlock& raw, const ImageGroup& images, int size) {
  switch (kind) {
    case ModelKind::wifi: return wifi_channels(raw, size);
    case ModelKind::visual: return visual_channels(images, size);
    case ModelKind::joint: return joint_channels(raw, images, size);
  }
  throw InputError("unknown model kind");
}

NetworkConfig default_network_config(ModelKind kind, const DatasetManifest& manifest, std::uint64_t seed) {
  const int channels = kind == ModelKind::wifi     ? 4
                       : kind == ModelKind::visual ? manifest.images_per_group
                                                   : 4 + manifest.images_per_group;
  NetworkConfig c = NetworkConfig::lenet(channels, manifest.image_size, manifest.num_cells);
  c.seed = seed;
  return c;
}

std::vector<LabeledInput> build_training_set(const Dataset& dataset, ModelKind kind, int size) {
  const auto pairs = association_pairs(dataset.manifest.rssi_groups, dataset.manifest.photo_groups,
                                       dataset.manifest.association);
  std::vector<LabeledInput> samples;
  samples.reserve(pairs.size() * dataset.cells.size());
  for (int label = 0; label < dataset.grid.size(); ++label) {
    const CellData& cd = dataset.cells[static_cast<std::size_t>(label)];
    // WiFi features depend only on the RSSI group; compute each once.
    std::vector<ChannelStack> wifi(cd.rssi_groups.size());
    for (const auto& [w, i] : pairs) {
      const RssiBlock& rssi = cd.rssi_groups[static_cast<std::size_t>(w)];
      const ImageGroup& images = cd.photo_groups[static_cast<std::size_t>(i)];
      ChannelStack stack;
      if (kind == ModelKind::visual) {
        stack = visual_channels(images, size);
      } else {
        ChannelStack& cached = wifi[static_cast<std::size_t>(w)];
        if (cached.empty()) cached = wifi_channels(rssi, size);
        stack = cached;
        if (kind == ModelKind::joint)
          for (Eigen::MatrixXd& img : visual_channels(images, size)) stack.push_back(std::move(img));
      }
      samples.push_back({std::move(stack), label});
    }
  }
  return samples;
}

TrainedModel train_from_dataset(const Dataset& dataset, ModelKind kind, const NetworkConfig& config) {
  config.validate();
  if (config.num_classes != dataset.grid.size())
    throw ConfigError("num_classes", fmt::format("{} classes for a grid of {} cells", config.num_classes, dataset.grid.size()));
  return train(build_network(config), build_training_set(dataset, kind, config.input_size), config);
}

void write_training_log_csv(const TrainedModel& model, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << "epoch,loss,accuracy\n";
  for (const EpochStats& e : model.training_log) out << fmt::format("{},{:.9f},{:.6f}\n", e.epoch, e.loss, e.accuracy);
}

std::vector<PointLikelihoods> compute_likelihoods(std::span<const Sample> points, const ModelSet& models) {
  std::vector<PointLikelihoods> out;
  out.reserve(points.size());
  for (const Sample& s : points) {
    PointLikelihoods pl;
    if (models.wifi)
      pl.p_w = predict_likelihood(*models.wifi, wifi_channels(s.rssi, models.wifi->config.input_size),
                                  LikelihoodSource::wifi);
    if (models.visual)
      pl.p_v = predict_likelihood(*models.visual, visual_channels(s.images, models.visual->config.input_size),
                                  LikelihoodSource::visual);
    if (models.joint)
      pl.p_wv = predict_likelihood(*models.joint, joint_channels(s.rssi, s.images, models.joint->config.input_size),
                                   LikelihoodSource::joint);
    out.push_back(std::move(pl));
  }
  return out;
}

std::vector<EstimateRow> localize(std::span<const Sample> points, std::span<const PointLikelihoods> likelihoods,
                                  const CellGrid& grid, FusionMode mode, const BaselineParams& params) {
  if (points.size() != likelihoods.size()) throw InputError("one likelihood set per point required");
  // Only the parameter the mode consumes is checked.
  BaselineParams checked;
  if (mode == FusionMode::dist_thresh) checked.distance_threshold_d = params.distance_threshold_d;
  if (mode == FusionMode::prob_thresh) checked.probability_threshold_gamma = params.probability_threshold_gamma;
  checked.top_k = mode == FusionMode::topk ? params.top_k : 1;
  checked.validate(grid.size());
  std::vector<EstimateRow> rows;
  rows.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointLikelihoods& pl = likelihoods[i];
    const FusionResult fused = fuse(mode, pl.p_w, pl.p_v, pl.p_wv, grid, params);
    const Decision d = decide(fused.probs, grid);
    rows.push_back({static_cast<int>(i), {points[i].true_x, points[i].true_y}, {d.x, d.y}, d.label, fused.flagged});
  }
  return rows;
}

void write_estimates_csv(const fs::path& path, std::span<const EstimateRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << "index,truth_x,truth_y,est_x,est_y,est_label,flags\n";
  for (const EstimateRow& r : rows)
    out << fmt::format("{},{},{},{},{},{},{}\n", r.index, r.truth.x, r.truth.y, r.estimate.x, r.estimate.y, r.label,
                       r.flagged ? 1 : 0);
}

std::vector<EstimateRow> read_estimates_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::string line;
  int line_no = 0;
  std::vector<EstimateRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("index", 0) == 0) continue;
    std::vector<double> f;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      const std::string field = line.substr(start, end - start);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (field.empty() || used != field.size())
        throw DatasetError(fmt::format("{}:{}: malformed field '{}'", path.string(), line_no, field));
      f.push_back(v);
      start = end + 1;
    }
    if (f.size() != 7)
      throw DatasetError(fmt::format("{}:{}: expected 7 fields, found {}", path.string(), line_no, f.size()));
    rows.push_back({static_cast<int>(f[0]), {f[1], f[2]}, {f[3], f[4]}, static_cast<int>(f[5]), f[6] != 0.0});
  }
  return rows;
}

EvalReport evaluate_rows(std::span<const EstimateRow> rows, const std::string& mode_label) {
  std::vector<Point2> est, truth;
  for (const EstimateRow& r : rows) {
    est.push_back(r.estimate);
    truth.push_back(r.truth);
  }
  return compute_metrics(est, truth, mode_label);
}

std::vector<EvalReport> write_evaluation(const fs::path& out_dir, std::span<const EvaluationSet> sets) {
  if (sets.empty()) throw EmptySetError("no estimate sets to evaluate");
  fs::create_directories(out_dir);
  std::vector<EvalReport> reports;
  for (const EvaluationSet& s : sets) reports.push_back(evaluate_rows(s.rows, s.label));
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw DatasetError("cannot write " + (out_dir / name).string());
    out << text;
  };
  write("report.csv", report_table_csv(reports));
  write("cdf.csv", cdf_table_csv(reports));
  for (const EvalReport& r : reports) {
    std::string text = "index,error\n";
    for (const auto& [i, e] : r.per_point_errors) text += fmt::format("{},{:.6f}\n", i, e);
    write(fmt::format("errors_{}.csv", r.mode_label), text);
  }
  if (reports.size() >= 2) write("comparison.svg", comparison_svg(reports));
  else fs::remove(out_dir / "comparison.svg");
  std::vector<Point2> truth;
  for (const EstimateRow& r : sets.front().rows) truth.push_back(r.truth);
  std::vector<TrajectorySeries> series;
  for (const EvaluationSet& s : sets) {
    TrajectorySeries ts{s.label, {}};
    for (const EstimateRow& r : s.rows) ts.estimates.push_back(r.estimate);
    series.push_back(std::move(ts));
  }
  write("trajectory.svg", trajectory_svg(truth, series));
  return reports;
}

std::vector<ModeSpec> standard_modes() {
  return {{"wifi", FusionMode::wifi, {}},
          {"visual", FusionMode::visual, {}},
          {"joint", FusionMode::joint, {}},
          {"hadamard", FusionMode::hadamard, {}},
          {"double-layer", FusionMode::double_layer, {}}};
}

BenchmarkRun run_benchmark(const GeneratorConfig& generator, const TrainingSettings& training,
                           std::span<const ModeSpec> modes, const fs::path& work_dir) {
  const fs::path data_dir = work_dir / "dataset";
  generate_dataset(generator, data_dir);
  BenchmarkRun run{load_dataset(data_dir), {}, {}, {}, {}};
  const fs::path model_dir = work_dir / "models";
  fs::create_directories(model_dir);
  for (ModelKind kind : {ModelKind::wifi, ModelKind::visual, ModelKind::joint}) {
    NetworkConfig cfg = default_network_config(kind, run.dataset.manifest,
                                               derive_seed(training.seed, static_cast<std::uint64_t>(kind)));
    cfg.epochs = training.epochs;
    cfg.learning_rate = training.learning_rate;
    cfg.batch_size = training.batch_size;
    TrainedModel model = train_from_dataset(run.dataset, kind, cfg);
    save_checkpoint(model, model_dir / fmt::format("{}.json", to_string(kind)));
    write_training_log_csv(model, model_dir / fmt::format("{}_log.csv", to_string(kind)));
    (kind == ModelKind::wifi ? run.models.wifi : kind == ModelKind::visual ? run.models.visual : run.models.joint) =
        std::move(model);
  }
  run.likelihoods = compute_likelihoods(run.dataset.test, run.models);
  const fs::path est_dir = work_dir / "estimates";
  fs::create_directories(est_dir);
  for (const ModeSpec& m : modes) {
    EvaluationSet set{m.label, localize(run.dataset.test, run.likelihoods, run.dataset.grid, m.mode, m.params)};
    write_estimates_csv(est_dir / fmt::format("{}.csv", m.label), set.rows);
    run.sets.push_back(std::move(set));
  }
  run.reports = write_evaluation(work_dir / "eval", run.sets);
  return run;
}

}  // namespace wvfusion
