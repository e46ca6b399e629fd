#pragma once

#include "wvfusion/core_model.hpp"

#include <Eigen/Dense>

namespace wvfusion {

// Columns whose standard deviation falls below this become all-zero sentinels.
inline constexpr double kZeroVarianceThreshold = 1e-9;

// Centres each AP column to mean 0 and scales it to unit (population)
// standard deviation. Missing readings are expected as kMissingRssiDbm.
RssiBlock preprocess_rssi(const RssiBlock& raw);

// Temporal-spatial spectrum of an RSSI block.
struct SpectrumFeature {
  Eigen::MatrixXcd complex_spectrum;
  Eigen::MatrixXd amplitude;
  Eigen::MatrixXd phase;  // in (-pi, pi]
};

// Unitary n x n DFT matrix, entry (r, c) = exp(-2 pi i r c / n) / sqrt(n).
Eigen::MatrixXcd dft_matrix(int n);

// F_M^T * S * F_K with unitary scaling on both sides.
SpectrumFeature dft_2d(const RssiBlock& standardized);

struct CorrelationFeature {
  Eigen::MatrixXd matrix;  // K x K, symmetric, entries in [-1, 1]
};

// S^T S / M of a standardized block.
CorrelationFeature correlation(const RssiBlock& standardized);

// The four WiFi channels as equally sized D x D images in [0, 1], D = max(M, K).
struct WifiFeatureSet {
  Eigen::MatrixXd amp;
  Eigen::MatrixXd phase;
  Eigen::MatrixXd corr;
  Eigen::MatrixXd rssi;

  int size() const { return static_cast<int>(amp.rows()); }
  // Channel order amp, phase, corr, rssi.
  ChannelStack channels() const { return {amp, phase, corr, rssi}; }
};

// Zero-pads every channel to D x D (bottom rows, right columns), then scales:
// amp, corr and rssi min-max to [0, 1] (constant channel -> 0.5); phase maps
// linearly from [-pi, pi] to [0, 1].
WifiFeatureSet to_feature_set(const SpectrumFeature& spectrum, const CorrelationFeature& corr,
                              const RssiBlock& standardized);

// preprocess -> dft_2d / correlation -> to_feature_set.
WifiFeatureSet extract_wifi_features(const RssiBlock& raw);

}  // namespace wvfusion
