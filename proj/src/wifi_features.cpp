#include "wvfusion/wifi_features.hpp"

#include "wvfusion/errors.hpp"

#include <cmath>
#include <numbers>

namespace wvfusion {

RssiBlock preprocess_rssi(const RssiBlock& raw) {
  if (raw.standardized()) throw InputError("RSSI block is already standardized");
  const Eigen::MatrixXd& v = raw.values();
  const double m = static_cast<double>(v.rows());
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    const double mean = v.col(k).mean();
    Eigen::VectorXd centred = v.col(k).array() - mean;
    const double sd = std::sqrt(centred.squaredNorm() / m);
    if (sd < kZeroVarianceThreshold) {
      out.col(k).setZero();
      continue;
    }
    centred /= sd;
    // Re-centre to remove the rounding residue of the division.
    centred.array() -= centred.mean();
    out.col(k) = centred;
  }
  return RssiBlock(std::move(out), raw.ap_ids(), true);
}

Eigen::MatrixXcd dft_matrix(int n) {
  if (n < 1) throw InputError("DFT size must be positive");
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      // Reduce the exponent mod n before the trig call to keep large products exact.
      const long long e = (static_cast<long long>(r) * c) % n;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(e) / n;
      f(r, c) = std::polar(scale, angle);
    }
  }
  return f;
}

SpectrumFeature dft_2d(const RssiBlock& standardized) {
  if (!standardized.standardized()) throw InputError("dft_2d expects a standardized block");
  const Eigen::MatrixXd& s = standardized.values();
  const Eigen::MatrixXcd fm = dft_matrix(static_cast<int>(s.rows()));
  const Eigen::MatrixXcd fk = dft_matrix(static_cast<int>(s.cols()));
  SpectrumFeature out;
  out.complex_spectrum = fm.transpose() * s.cast<std::complex<double>>() * fk;
  out.amplitude = out.complex_spectrum.cwiseAbs();
  out.phase = out.complex_spectrum.unaryExpr([](const std::complex<double>& z) {
    const double p = std::arg(z);
    return p <= -std::numbers::pi ? std::numbers::pi : p;
  });
  return out;
}

CorrelationFeature correlation(const RssiBlock& standardized) {
  if (!standardized.standardized()) throw InputError("correlation expects a standardized block");
  const Eigen::MatrixXd& s = standardized.values();
  const Eigen::MatrixXd gram = s.transpose() * s / static_cast<double>(s.rows());
  Eigen::MatrixXd r = (gram + gram.transpose()) / 2.0;
  r = r.cwiseMax(-1.0).cwiseMin(1.0);
  return {std::move(r)};
}

namespace {

Eigen::MatrixXd pad_square(const Eigen::MatrixXd& m, Eigen::Index d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

Eigen::MatrixXd min_max_scale(const Eigen::MatrixXd& m) {
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  if (!(hi - lo > 0.0)) return Eigen::MatrixXd::Constant(m.rows(), m.cols(), 0.5);
  return (m.array() - lo) / (hi - lo);
}

}  // namespace

WifiFeatureSet to_feature_set(const SpectrumFeature& spectrum, const CorrelationFeature& corr,
                              const RssiBlock& standardized) {
  const Eigen::Index m = standardized.values().rows();
  const Eigen::Index k = standardized.values().cols();
  if (spectrum.amplitude.rows() != m || spectrum.amplitude.cols() != k || spectrum.phase.rows() != m ||
      spectrum.phase.cols() != k)
    throw InputError("spectrum shape does not match the RSSI block");
  if (corr.matrix.rows() != k || corr.matrix.cols() != k) throw InputError("correlation must be K x K");
  const Eigen::Index d = std::max(m, k);
  WifiFeatureSet out;
  out.amp = min_max_scale(pad_square(spectrum.amplitude, d));
  out.phase = (pad_square(spectrum.phase, d).array() + std::numbers::pi) / (2.0 * std::numbers::pi);
  out.corr = min_max_scale(pad_square(corr.matrix, d));
  out.rssi = min_max_scale(pad_square(standardized.values(), d));
  return out;
}

WifiFeatureSet extract_wifi_features(const RssiBlock& raw) {
  const RssiBlock s = preprocess_rssi(raw);
  return to_feature_set(dft_2d(s), correlation(s), s);
}

}  // namespace wvfusion
