#include "wvfusion/fusion.hpp"

#include "wvfusion/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <numeric>

namespace wvfusion {

namespace {

void require_same_length(const LikelihoodVector& a, const LikelihoodVector& b) {
  if (a.size() != b.size())
    throw InputError(fmt::format("likelihood vectors differ in length ({} vs {})", a.size(), b.size()));
}

// Renormalized `secondary` restricted to `keep`; unfiltered + flag if nothing survives.
FusionResult restrict_to(const LikelihoodVector& secondary, const std::vector<bool>& keep) {
  Eigen::VectorXd w = secondary.probs();
  for (int i = 0; i < w.size(); ++i)
    if (!keep[static_cast<std::size_t>(i)]) w[i] = 0.0;
  if (!(w.sum() > 0.0)) return {secondary, true};
  return {LikelihoodVector::normalized(w, secondary.source()), false};
}

// Indices sorted by descending probability, smaller index first on ties.
std::vector<int> ranking(const LikelihoodVector& p) {
  std::vector<int> idx(static_cast<std::size_t>(p.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return p[a] > p[b]; });
  return idx;
}

}  // namespace

void FusionInput::validate() const {
  require_same_length(p_w, p_v);
  require_same_length(p_w, p_wv);
}

ChannelStack stack_joint_channels(const WifiFeatureSet& wifi, const ImageGroup& images) {
  const int d = wifi.size();
  if (images.height() != d || images.width() != d)
    throw InputError(fmt::format("WiFi channels are {0}x{0} but images are {1}x{2}", d, images.height(), images.width()));
  ChannelStack stack = wifi.channels();
  for (const Eigen::MatrixXd& img : images.images()) stack.push_back(img);
  return stack;
}

FusionResult hadamard_fuse(const FusionInput& input) {
  input.validate();
  const Eigen::VectorXd product =
      input.p_w.probs().cwiseProduct(input.p_v.probs()).cwiseProduct(input.p_wv.probs());
  if (!(product.sum() >= kHadamardUnderflow))
    return {LikelihoodVector::uniform(input.p_w.size(), LikelihoodSource::hadamard), true};
  return {LikelihoodVector::normalized(product, LikelihoodSource::hadamard), false};
}

LikelihoodVector median_fuse(const LikelihoodVector& p_w, const LikelihoodVector& p_v, const LikelihoodVector& p_wvm) {
  require_same_length(p_w, p_v);
  require_same_length(p_w, p_wvm);
  Eigen::VectorXd med(p_w.size());
  for (int i = 0; i < p_w.size(); ++i) {
    std::array<double, 3> v{p_w[i], p_v[i], p_wvm[i]};
    std::sort(v.begin(), v.end());
    med[i] = v[1];
  }
  // Three vectors with disjoint support have an all-zero median.
  if (!(med.sum() > 0.0)) return LikelihoodVector::uniform(p_w.size(), LikelihoodSource::final);
  return LikelihoodVector::normalized(med, LikelihoodSource::final);
}

FusionResult double_layer_fuse(const FusionInput& input) {
  const FusionResult wvm = hadamard_fuse(input);
  LikelihoodVector final_vec = median_fuse(input.p_w, input.p_v, wvm.probs);
  return {std::move(final_vec), wvm.flagged};
}

Decision decide(const LikelihoodVector& p, const CellGrid& grid) {
  if (p.size() != grid.size())
    throw InputError(fmt::format("likelihood over {} cells for a grid of {}", p.size(), grid.size()));
  int best = 0;
  for (int i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  const Point2 c = grid.label_to_centre(best);
  return {best, c.x, c.y};
}

void BaselineParams::validate(int num_cells) const {
  if (!(distance_threshold_d > 0.0)) throw ConfigError("d", "distance threshold must be > 0");
  if (!(probability_threshold_gamma > 0.0 && probability_threshold_gamma <= 1.0))
    throw ConfigError("gamma", "probability threshold must lie in (0, 1]");
  if (top_k < 1 || top_k > num_cells) throw ConfigError("topk", fmt::format("must lie in [1, {}]", num_cells));
}

FusionResult distance_threshold_fuse(const LikelihoodVector& p_w, const LikelihoodVector& p_v, const CellGrid& grid,
                                     double d) {
  require_same_length(p_w, p_v);
  if (!(d > 0.0)) throw ConfigError("d", "distance threshold must be > 0");
  const Decision centre = decide(p_w, grid);
  std::vector<bool> keep(static_cast<std::size_t>(p_v.size()));
  for (int i = 0; i < p_v.size(); ++i)
    keep[static_cast<std::size_t>(i)] = distance(grid.label_to_centre(i), {centre.x, centre.y}) <= d;
  return restrict_to(p_v, keep);
}

FusionResult probability_threshold_fuse(const LikelihoodVector& p_primary, const LikelihoodVector& p_secondary,
                                        double gamma) {
  require_same_length(p_primary, p_secondary);
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "probability threshold must lie in (0, 1]");
  std::vector<bool> keep(static_cast<std::size_t>(p_primary.size()), gamma >= 1.0);
  if (gamma < 1.0) {
    double cumulative = 0.0;
    for (int i : ranking(p_primary)) {
      keep[static_cast<std::size_t>(i)] = true;
      cumulative += p_primary[i];
      if (cumulative >= gamma) break;
    }
  }
  return restrict_to(p_secondary, keep);
}

FusionResult topk_fuse(const LikelihoodVector& p_primary, const LikelihoodVector& p_secondary, int k) {
  require_same_length(p_primary, p_secondary);
  if (k < 1 || k > p_primary.size()) throw ConfigError("topk", fmt::format("must lie in [1, {}]", p_primary.size()));
  std::vector<bool> keep(static_cast<std::size_t>(p_primary.size()), false);
  const std::vector<int> order = ranking(p_primary);
  for (int i = 0; i < k; ++i) keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  return restrict_to(p_secondary, keep);
}

std::string_view to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::wifi: return "wifi";
    case FusionMode::visual: return "visual";
    case FusionMode::joint: return "joint";
    case FusionMode::hadamard: return "hadamard";
    case FusionMode::double_layer: return "double-layer";
    case FusionMode::dist_thresh: return "dist-thresh";
    case FusionMode::prob_thresh: return "prob-thresh";
    case FusionMode::topk: return "topk";
  }
  return "unknown";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view name) {
  for (FusionMode m : {FusionMode::wifi, FusionMode::visual, FusionMode::joint, FusionMode::hadamard,
                       FusionMode::double_layer, FusionMode::dist_thresh, FusionMode::prob_thresh, FusionMode::topk})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

ModeNeeds needs_of(FusionMode mode) {
  switch (mode) {
    case FusionMode::wifi: return {true, false, false};
    case FusionMode::visual: return {false, true, false};
    case FusionMode::joint: return {false, false, true};
    case FusionMode::hadamard:
    case FusionMode::double_layer: return {true, true, true};
    case FusionMode::dist_thresh:
    case FusionMode::prob_thresh:
    case FusionMode::topk: return {true, true, false};
  }
  return {};
}

FusionResult fuse(FusionMode mode, const std::optional<LikelihoodVector>& p_w,
                  const std::optional<LikelihoodVector>& p_v, const std::optional<LikelihoodVector>& p_wv,
                  const CellGrid& grid, const BaselineParams& params) {
  const ModeNeeds needs = needs_of(mode);
  if ((needs.wifi && !p_w) || (needs.visual && !p_v) || (needs.joint && !p_wv))
    throw InputError(fmt::format("fusion mode {} is missing a required likelihood vector", to_string(mode)));
  switch (mode) {
    case FusionMode::wifi: return {*p_w, false};
    case FusionMode::visual: return {*p_v, false};
    case FusionMode::joint: return {*p_wv, false};
    case FusionMode::hadamard: return hadamard_fuse({*p_w, *p_v, *p_wv});
    case FusionMode::double_layer: return double_layer_fuse({*p_w, *p_v, *p_wv});
    case FusionMode::dist_thresh: return distance_threshold_fuse(*p_w, *p_v, grid, params.distance_threshold_d);
    case FusionMode::prob_thresh: return probability_threshold_fuse(*p_w, *p_v, params.probability_threshold_gamma);
    case FusionMode::topk: return topk_fuse(*p_w, *p_v, params.top_k);
  }
  throw InputError("unknown fusion mode");
}

}  // namespace wvfusion
