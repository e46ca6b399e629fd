#pragma once

#include "wvfusion/core_model.hpp"
#include "wvfusion/wifi_features.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace wvfusion {

// The three classifier outputs entering decision fusion.
struct FusionInput {
  LikelihoodVector p_w;
  LikelihoodVector p_v;
  LikelihoodVector p_wv;

  void validate() const;
};

// A fused vector plus whether a degenerate fallback was taken.
struct FusionResult {
  LikelihoodVector probs;
  bool flagged = false;
};

// Raw Hadamard products below this total are treated as vanishing evidence.
inline constexpr double kHadamardUnderflow = 1e-300;

// (amp, phase, corr, rssi, img_0 .. img_{S-1}); all channels must share one size.
ChannelStack stack_joint_channels(const WifiFeatureSet& wifi, const ImageGroup& images);

// p_w * p_v * p_wv element-wise, renormalized; uniform + flag on underflow.
FusionResult hadamard_fuse(const FusionInput& input);

// Element-wise median of the three vectors, renormalized.
LikelihoodVector median_fuse(const LikelihoodVector& p_w, const LikelihoodVector& p_v,
                             const LikelihoodVector& p_wvm);

// Hadamard product followed by the median filter against p_w and p_v.
FusionResult double_layer_fuse(const FusionInput& input);

struct Decision {
  int label = 0;
  double x = 0.0;
  double y = 0.0;
};

// Argmax (smallest index on ties) mapped to its cell centre.
Decision decide(const LikelihoodVector& p, const CellGrid& grid);

struct BaselineParams {
  double distance_threshold_d = 4.0;
  double probability_threshold_gamma = 0.9;
  int top_k = 5;

  void validate(int num_cells) const;
};

// Keeps p_v only within `d` metres of the WiFi argmax cell centre.
FusionResult distance_threshold_fuse(const LikelihoodVector& p_w, const LikelihoodVector& p_v, const CellGrid& grid,
                                     double d);

// Keeps p_secondary on the smallest set of p_primary's most likely cells whose
// cumulative probability reaches gamma. gamma = 1 keeps every cell.
FusionResult probability_threshold_fuse(const LikelihoodVector& p_primary, const LikelihoodVector& p_secondary,
                                        double gamma);

// Keeps p_secondary on p_primary's k most likely cells (smaller index on ties).
FusionResult topk_fuse(const LikelihoodVector& p_primary, const LikelihoodVector& p_secondary, int k);

enum class FusionMode { wifi, visual, joint, hadamard, double_layer, dist_thresh, prob_thresh, topk };

std::string_view to_string(FusionMode mode);
std::optional<FusionMode> parse_fusion_mode(std::string_view name);

struct ModeNeeds {
  bool wifi = false;
  bool visual = false;
  bool joint = false;
};

// Which classifier outputs a mode consumes.
ModeNeeds needs_of(FusionMode mode);

// Applies `mode` to whichever vectors it needs; absent ones may be nullopt.
FusionResult fuse(FusionMode mode, const std::optional<LikelihoodVector>& p_w,
                  const std::optional<LikelihoodVector>& p_v, const std::optional<LikelihoodVector>& p_wv,
                  const CellGrid& grid, const BaselineParams& params);

}  // namespace wvfusion
