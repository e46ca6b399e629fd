#include "wvfusion/errors.hpp"
#include "wvfusion/pipeline.hpp"
#include "wvfusion/wifi_features.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace wvfusion;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::optional<std::uint64_t> seed;
  std::string out;
};

fs::path out_or(const Global& g, const char* fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

void require_dir(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(fmt::format("{} path is required", what));
  if (!fs::is_directory(path)) throw UsageError(fmt::format("{} '{}' does not exist", what, path));
}

int cmd_generate(const Global& g, const std::string& config_path) {
  GeneratorConfig config = config_path.empty() ? GeneratorConfig::benchmark(0) : GeneratorConfig::load(config_path);
  if (g.seed) config.seed = *g.seed;
  const fs::path out = out_or(g, "dataset");
  generate_dataset(config, out);
  const auto problems = validate_dataset(out);
  for (const std::string& p : problems) std::cerr << "invalid: " << p << '\n';
  if (!problems.empty()) return 2;
  std::cout << fmt::format("dataset written to {}\n", out.string());
  return 0;
}

int cmd_validate(const std::string& dataset) {
  require_dir(dataset, "dataset");
  const auto problems = validate_dataset(dataset);
  for (const std::string& p : problems) std::cout << "invalid: " << p << '\n';
  if (!problems.empty()) return 2;
  std::cout << "ok\n";
  return 0;
}

struct TrainArgs {
  std::string dataset;
  std::string which;
  int epochs = -1;
  double learning_rate = -1.0;
  int batch_size = -1;
};

int cmd_train(const Global& g, const TrainArgs& a) {
  require_dir(a.dataset, "dataset");
  const auto kind = parse_model_kind(a.which);
  if (!kind) throw UsageError(fmt::format("--which must be wifi, visual or joint (got '{}')", a.which));
  const Dataset dataset = load_dataset(a.dataset, false);
  NetworkConfig config = default_network_config(*kind, dataset.manifest, g.seed.value_or(0));
  if (a.epochs >= 0) config.epochs = a.epochs;
  if (a.learning_rate > 0) config.learning_rate = a.learning_rate;
  if (a.batch_size > 0) config.batch_size = a.batch_size;
  const TrainedModel model = train_from_dataset(dataset, *kind, config);
  const fs::path out = out_or(g, "models");
  fs::create_directories(out);
  const fs::path ckpt = out / fmt::format("{}.json", a.which);
  save_checkpoint(model, ckpt);
  write_training_log_csv(model, out / fmt::format("{}_log.csv", a.which));
  const EpochStats last = model.training_log.empty() ? EpochStats{} : model.training_log.back();
  std::cout << fmt::format("{}: {} channels, {} parameters, loss {:.4f}, accuracy {:.4f} -> {}\n", a.which,
                           config.input_channels, model.parameters.size(), last.loss, last.accuracy, ckpt.string());
  return 0;
}

ModelSet load_models(const std::string& models_dir, const ModeNeeds& needs) {
  ModelSet set;
  auto load = [&](bool needed, const char* name, std::optional<TrainedModel>& slot) {
    if (!needed) return;
    const fs::path p = fs::path(models_dir) / fmt::format("{}.json", name);
    if (!fs::exists(p)) throw UsageError(fmt::format("missing {} checkpoint: {}", name, p.string()));
    slot = load_checkpoint(p);
  };
  load(needs.wifi, "wifi", set.wifi);
  load(needs.visual, "visual", set.visual);
  load(needs.joint, "joint", set.joint);
  return set;
}

void dump_wifi_features(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < dataset.test.size(); ++i) {
    const WifiFeatureSet f = extract_wifi_features(dataset.test[i].rssi);
    const char* names[] = {"amp", "phase", "corr", "rssi"};
    const ChannelStack channels = f.channels();
    for (std::size_t c = 0; c < channels.size(); ++c)
      write_pgm(dir / fmt::format("wifi_{}_{}.pgm", i, names[c]), channels[c]);
  }
}

struct LocalizeArgs {
  std::string dataset;
  std::string models;
  std::string fusion = "double-layer";
  BaselineParams params;
  std::string dump_wifi;
};

int cmd_localize(const Global& g, const LocalizeArgs& a) {
  const auto mode = parse_fusion_mode(a.fusion);
  if (!mode) throw UsageError(fmt::format("unknown fusion mode '{}'", a.fusion));
  require_dir(a.dataset, "dataset");
  require_dir(a.models, "models");
  const ModelSet models = load_models(a.models, needs_of(*mode));
  const Dataset dataset = load_dataset(a.dataset);
  if (!a.dump_wifi.empty()) dump_wifi_features(dataset, a.dump_wifi);
  const auto likelihoods = compute_likelihoods(dataset.test, models);
  const auto rows = localize(dataset.test, likelihoods, dataset.grid, *mode, a.params);
  const fs::path out = out_or(g, "estimates");
  fs::create_directories(out);
  const fs::path file = out / fmt::format("{}.csv", a.fusion);
  write_estimates_csv(file, rows);
  std::cout << fmt::format("{} estimates -> {}\n", rows.size(), file.string());
  return 0;
}

int cmd_evaluate(const Global& g, const std::vector<std::string>& files) {
  if (files.empty()) throw UsageError("at least one estimates file is required");
  std::vector<EvaluationSet> sets;
  for (const std::string& f : files) {
    std::vector<EstimateRow> rows = read_estimates_csv(f);
    if (rows.empty()) throw EmptySetError(fmt::format("{} contains no estimates", f));
    sets.push_back({fs::path(f).stem().string(), std::move(rows)});
  }
  const fs::path out = out_or(g, "eval");
  for (const EvalReport& r : sorted_by_rmse(write_evaluation(out, sets)))
    std::cout << fmt::format("{:<16} rmse {:.4f}  mae {:.4f}  std {:.4f}\n", r.mode_label, r.rmse, r.mae, r.std);
  return 0;
}

struct CompareArgs {
  std::string dataset;
  std::string models;
  BaselineParams params;
};

int cmd_compare(const Global& g, const CompareArgs& a) {
  require_dir(a.dataset, "dataset");
  require_dir(a.models, "models");
  const ModelSet models = load_models(a.models, {true, true, true});
  const Dataset dataset = load_dataset(a.dataset);
  const auto likelihoods = compute_likelihoods(dataset.test, models);
  const fs::path out = out_or(g, "compare");
  fs::create_directories(out / "estimates");
  std::vector<EvaluationSet> sets;
  for (FusionMode mode : {FusionMode::wifi, FusionMode::visual, FusionMode::joint, FusionMode::hadamard,
                          FusionMode::double_layer, FusionMode::dist_thresh, FusionMode::prob_thresh,
                          FusionMode::topk}) {
    const std::string label(to_string(mode));
    EvaluationSet set{label, localize(dataset.test, likelihoods, dataset.grid, mode, a.params)};
    write_estimates_csv(out / "estimates" / (label + ".csv"), set.rows);
    sets.push_back(std::move(set));
  }
  for (const EvalReport& r : sorted_by_rmse(write_evaluation(out, sets)))
    std::cout << fmt::format("{:<16} rmse {:.4f}  mae {:.4f}  std {:.4f}\n", r.mode_label, r.rmse, r.mae, r.std);
  return 0;
}

void add_baseline_flags(CLI::App* cmd, BaselineParams& p) {
  cmd->add_option("--d", p.distance_threshold_d, "distance threshold (m)");
  cmd->add_option("--gamma", p.probability_threshold_gamma, "cumulative probability threshold");
  cmd->add_option("--topk", p.top_k, "candidate count for top-k");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WiFi-visual fusion localization"};
  app.require_subcommand(1);
  Global g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--out", g.out, "output path");

  std::string config_path;
  auto* generate = app.add_subcommand("generate", "simulate a dataset");
  generate->add_option("--config", config_path, "generator JSON");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a dataset directory");
  validate->add_option("dataset", validate_path)->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train one classifier");
  train_cmd->add_option("--dataset", train_args.dataset)->required();
  train_cmd->add_option("--which", train_args.which, "wifi | visual | joint")->required();
  train_cmd->add_option("--epochs", train_args.epochs);
  train_cmd->add_option("--lr", train_args.learning_rate);
  train_cmd->add_option("--batch", train_args.batch_size);

  LocalizeArgs loc_args;
  auto* localize_cmd = app.add_subcommand("localize", "estimate positions of the test split");
  localize_cmd->add_option("--dataset", loc_args.dataset)->required();
  localize_cmd->add_option("--models", loc_args.models, "directory holding <which>.json checkpoints")->required();
  localize_cmd->add_option("--fusion", loc_args.fusion,
                           "wifi|visual|joint|hadamard|double-layer|dist-thresh|prob-thresh|topk");
  localize_cmd->add_option("--dump-wifi", loc_args.dump_wifi, "write WiFi feature channels as PGM here");
  add_baseline_flags(localize_cmd, loc_args.params);

  std::vector<std::string> eval_files;
  auto* evaluate = app.add_subcommand("evaluate", "metrics and plots from estimates files");
  evaluate->add_option("files", eval_files)->required();

  CompareArgs cmp_args;
  auto* compare = app.add_subcommand("compare", "localize and evaluate every fusion mode");
  compare->add_option("--dataset", cmp_args.dataset)->required();
  compare->add_option("--models", cmp_args.models)->required();
  add_baseline_flags(compare, cmp_args.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (generate->parsed()) return cmd_generate(g, config_path);
    if (validate->parsed()) return cmd_validate(validate_path);
    if (train_cmd->parsed()) return cmd_train(g, train_args);
    if (localize_cmd->parsed()) return cmd_localize(g, loc_args);
    if (evaluate->parsed()) return cmd_evaluate(g, eval_files);
    if (compare->parsed()) return cmd_compare(g, cmp_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
