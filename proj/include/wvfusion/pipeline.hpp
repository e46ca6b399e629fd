#pragma once

#include "wvfusion/classifier.hpp"
#include "wvfusion/dataset_io.hpp"
#include "wvfusion/eval.hpp"
#include "wvfusion/fusion.hpp"
#include "wvfusion/synth_data.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wvfusion {

enum class ModelKind { wifi, visual, joint };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

// Classifier inputs at a common square size. WiFi channels are D x D with
// D = max(M, K) and are resampled (nearest neighbour) to `size`, as are images.
ChannelStack wifi_channels(const RssiBlock& raw, int size);
ChannelStack visual_channels(const ImageGroup& images, int size);
ChannelStack joint_channels(const RssiBlock& raw, const ImageGroup& images, int size);
ChannelStack channels_for(ModelKind kind, const RssiBlock& raw, const ImageGroup& images, int size);

// LeNet configuration sized for the dataset: 4, S or 4 + S input channels at
// the image size, one class per cell.
NetworkConfig default_network_config(ModelKind kind, const DatasetManifest& manifest, std::uint64_t seed);

// Associated training samples of `kind` for every cell, channels at `size`.
std::vector<LabeledInput> build_training_set(const Dataset& dataset, ModelKind kind, int size);

// Trains a fresh network on build_training_set(dataset, kind, config.input_size).
TrainedModel train_from_dataset(const Dataset& dataset, ModelKind kind, const NetworkConfig& config);

void write_training_log_csv(const TrainedModel& model, const std::filesystem::path& path);

struct ModelSet {
  std::optional<TrainedModel> wifi;
  std::optional<TrainedModel> visual;
  std::optional<TrainedModel> joint;
};

// Per test point classifier outputs; entries are empty when the model is absent.
struct PointLikelihoods {
  std::optional<LikelihoodVector> p_w;
  std::optional<LikelihoodVector> p_v;
  std::optional<LikelihoodVector> p_wv;
};

std::vector<PointLikelihoods> compute_likelihoods(std::span<const Sample> points, const ModelSet& models);

struct EstimateRow {
  int index = 0;
  Point2 truth;
  Point2 estimate;
  int label = 0;
  bool flagged = false;
};

std::vector<EstimateRow> localize(std::span<const Sample> points, std::span<const PointLikelihoods> likelihoods,
                                  const CellGrid& grid, FusionMode mode, const BaselineParams& params);

void write_estimates_csv(const std::filesystem::path& path, std::span<const EstimateRow> rows);
// Throws DatasetError with the offending line number.
std::vector<EstimateRow> read_estimates_csv(const std::filesystem::path& path);

EvalReport evaluate_rows(std::span<const EstimateRow> rows, const std::string& mode_label);

struct EvaluationSet {
  std::string label;
  std::vector<EstimateRow> rows;
};

// Writes report.csv, cdf.csv, errors_<mode>.csv and trajectory.svg, plus
// comparison.svg when there are at least two modes.
std::vector<EvalReport> write_evaluation(const std::filesystem::path& out_dir, std::span<const EvaluationSet> sets);

// A named fusion mode with its baseline parameters.
struct ModeSpec {
  std::string label;
  FusionMode mode = FusionMode::double_layer;
  BaselineParams params;
};

// wifi, visual, joint, hadamard, double-layer.
std::vector<ModeSpec> standard_modes();

struct TrainingSettings {
  int epochs = 12;
  double learning_rate = 0.05;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct BenchmarkRun {
  Dataset dataset;
  ModelSet models;
  std::vector<PointLikelihoods> likelihoods;
  std::vector<EvaluationSet> sets;
  std::vector<EvalReport> reports;
};

// generate -> train (wifi, visual, joint) -> localize every mode -> evaluate,
// with all artifacts written below work_dir.
BenchmarkRun run_benchmark(const GeneratorConfig& generator, const TrainingSettings& training,
                           std::span<const ModeSpec> modes, const std::filesystem::path& work_dir);

}  // namespace wvfusion
