#pragma once

#include "wvfusion/core_model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace wvfusion {

// One convolution stage: `filters` kernels of size kernel x kernel, followed
// by ReLU and a 2x2 max-pool.
struct ConvSpec {
  int filters = 6;
  int kernel = 5;
  int stride = 1;
};

struct NetworkConfig {
  int input_channels = 4;
  int input_size = 58;
  int num_classes = 2;
  std::vector<ConvSpec> conv_layers{{6, 5, 1}, {16, 5, 1}};
  std::vector<int> dense_widths{120, 84};
  double learning_rate = 0.05;
  int batch_size = 16;
  int epochs = 12;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the first inconsistent field.
  void validate() const;

  // Two conv stages 6@5x5 and 16@5x5, dense 120-84-N.
  static NetworkConfig lenet(int input_channels, int input_size, int num_classes);
};

// Number of trainable parameters implied by the layer arithmetic.
std::size_t parameter_count(const NetworkConfig& config);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainedModel {
  NetworkConfig config;
  std::vector<double> parameters;
  std::vector<EpochStats> training_log;
};

struct LabeledInput {
  ChannelStack channels;
  int label = 0;
};

// Deterministic He-style initialization from config.seed.
TrainedModel build_network(const NetworkConfig& config);

// Mini-batch SGD on mean cross-entropy. The per-epoch shuffle is drawn from
// config.seed, so identical inputs give bit-identical parameters.
// Throws DivergenceError if an epoch's loss is not finite.
TrainedModel train(TrainedModel model, std::span<const LabeledInput> samples, const NetworkConfig& config);

// Raw pre-softmax scores.
Eigen::VectorXd logits(const TrainedModel& model, const ChannelStack& channels);

LikelihoodVector predict_likelihood(const TrainedModel& model, const ChannelStack& channels,
                                    LikelihoodSource source = LikelihoodSource::joint);

Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

// Mean cross-entropy of `samples` under `parameters`; fills `gradient` (same
// length as parameters) when non-null.
double loss_and_gradient(const NetworkConfig& config, std::span<const double> parameters,
                         std::span<const LabeledInput> samples, std::vector<double>* gradient);

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace wvfusion
