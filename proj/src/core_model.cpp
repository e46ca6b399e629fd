#include "wvfusion/core_model.hpp"

#include "wvfusion/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wvfusion {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Cell::contains(double x, double y, double tol) const {
  return std::abs(x - centre_x) <= half_width + tol && std::abs(y - centre_y) <= half_height + tol;
}

CellGrid::CellGrid(std::vector<Cell> cells) : cells_(std::move(cells)) {
  if (cells_.size() < 2) throw InputError("cell grid needs at least 2 cells");
  std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) { return a.label < b.label; });
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.label != static_cast<int>(i))
      throw InputError(fmt::format("cell labels must be exactly 0..{} without gaps", cells_.size() - 1));
    if (!(c.half_width > 0.0) || !(c.half_height > 0.0))
      throw InputError(fmt::format("cell {} has non-positive extent", c.label));
  }
  constexpr double kOverlapTol = 1e-12;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (std::size_t j = i + 1; j < cells_.size(); ++j) {
      const Cell& a = cells_[i];
      const Cell& b = cells_[j];
      const bool overlap_x = std::abs(a.centre_x - b.centre_x) < a.half_width + b.half_width - kOverlapTol;
      const bool overlap_y = std::abs(a.centre_y - b.centre_y) < a.half_height + b.half_height - kOverlapTol;
      if (overlap_x && overlap_y) throw InputError(fmt::format("cells {} and {} overlap", a.label, b.label));
    }
  }
  min_x_ = min_y_ = std::numeric_limits<double>::infinity();
  max_x_ = max_y_ = -std::numeric_limits<double>::infinity();
  for (const Cell& c : cells_) {
    min_x_ = std::min(min_x_, c.centre_x - c.half_width);
    max_x_ = std::max(max_x_, c.centre_x + c.half_width);
    min_y_ = std::min(min_y_, c.centre_y - c.half_height);
    max_y_ = std::max(max_y_, c.centre_y + c.half_height);
  }
}

CellGrid CellGrid::regular(int rows, int cols, double cell_width, double cell_height, double origin_x,
                           double origin_y) {
  if (rows < 1 || cols < 1) throw InputError("grid needs at least one row and one column");
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      cells.push_back({r * cols + c, origin_x + (c + 0.5) * cell_width, origin_y + (r + 0.5) * cell_height,
                       cell_width / 2.0, cell_height / 2.0});
    }
  }
  return CellGrid(std::move(cells));
}

const Cell& CellGrid::cell(int label) const {
  if (label < 0 || label >= size()) throw RangeError(fmt::format("label {} outside [0, {})", label, size()));
  return cells_[static_cast<std::size_t>(label)];
}

Point2 CellGrid::label_to_centre(int label) const { return cell(label).centre(); }

int CellGrid::point_to_label(double x, double y) const {
  for (const Cell& c : cells_) {
    if (c.contains(x, y)) return c.label;
  }
  throw OutOfMapError(fmt::format("point ({}, {}) lies outside every cell", x, y));
}

bool CellGrid::contains(Point2 p) const {
  return std::any_of(cells_.begin(), cells_.end(), [&](const Cell& c) { return c.contains(p.x, p.y); });
}

double CellGrid::diameter() const { return std::hypot(max_x_ - min_x_, max_y_ - min_y_); }

RssiBlock::RssiBlock(Eigen::MatrixXd values, std::vector<std::string> ap_ids, bool standardized)
    : values_(std::move(values)), ap_ids_(std::move(ap_ids)), standardized_(standardized) {
  if (values_.rows() < 2) throw InsufficientSamplesError("RSSI block needs at least 2 samples (M >= 2)");
  if (values_.cols() < 2) throw InputError("RSSI block needs at least 2 access points (K >= 2)");
  if (static_cast<Eigen::Index>(ap_ids_.size()) != values_.cols())
    throw InputError(fmt::format("{} AP ids for {} RSSI columns", ap_ids_.size(), values_.cols()));
  if (!values_.allFinite()) throw InputError("RSSI block contains non-finite values");
  if (standardized_) {
    const double m = static_cast<double>(values_.rows());
    for (Eigen::Index k = 0; k < values_.cols(); ++k) {
      const auto col = values_.col(k);
      if (col.isZero(0.0)) continue;
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / m);
      if (std::abs(mean) > 1e-9 || std::abs(sd - 1.0) > 1e-6)
        throw InputError(fmt::format("column {} is not standardized (mean {}, sd {})", k, mean, sd));
    }
  }
}

ImageGroup::ImageGroup(std::vector<Eigen::MatrixXd> images, std::vector<double> headings_deg)
    : images_(std::move(images)), headings_(std::move(headings_deg)) {
  if (images_.empty()) throw InputError("image group needs at least one image");
  if (headings_.size() != images_.size()) throw InputError("one heading per image required");
  const auto h = images_.front().rows();
  const auto w = images_.front().cols();
  for (const auto& img : images_) {
    if (img.rows() != h || img.cols() != w) throw InputError("images in a group must share dimensions");
    if (img.size() == 0 || img.minCoeff() < 0.0 || img.maxCoeff() > 1.0)
      throw InputError("pixel values must lie in [0, 1]");
  }
  // Headings strictly increasing modulo 360: positive steps covering less than a full turn.
  double turned = 0.0;
  for (std::size_t i = 1; i < headings_.size(); ++i) {
    const double step = std::fmod(std::fmod(headings_[i] - headings_[i - 1], 360.0) + 360.0, 360.0);
    if (step <= 0.0) throw InputError("headings must be strictly increasing modulo 360");
    turned += step;
  }
  if (turned >= 360.0) throw InputError("headings wrap past a full turn");
}

std::string_view to_string(LikelihoodSource source) {
  switch (source) {
    case LikelihoodSource::wifi: return "wifi";
    case LikelihoodSource::visual: return "visual";
    case LikelihoodSource::joint: return "joint";
    case LikelihoodSource::hadamard: return "hadamard";
    case LikelihoodSource::final: return "final";
  }
  return "unknown";
}

LikelihoodVector::LikelihoodVector(Eigen::VectorXd probs, LikelihoodSource source)
    : probs_(std::move(probs)), source_(source) {
  if (probs_.size() < 1) throw InputError("likelihood vector is empty");
  if (!probs_.allFinite() || probs_.minCoeff() < 0.0) throw InputError("likelihood entries must be finite and >= 0");
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > kLikelihoodSumTolerance)
    throw InputError(fmt::format("likelihood vector sums to {}, not 1", sum));
}

LikelihoodVector LikelihoodVector::normalized(const Eigen::VectorXd& weights, LikelihoodSource source) {
  if (weights.size() < 1 || !weights.allFinite() || weights.minCoeff() < 0.0)
    throw InputError("weights must be finite and non-negative");
  const double sum = weights.sum();
  if (!(sum > 0.0)) throw InputError("weights sum to zero");
  return LikelihoodVector(weights / sum, source);
}

LikelihoodVector LikelihoodVector::uniform(int n, LikelihoodSource source) {
  if (n < 1) throw InputError("uniform likelihood needs n >= 1");
  return LikelihoodVector(Eigen::VectorXd::Constant(n, 1.0 / n), source);
}

Eigen::MatrixXd resize_nearest(const Eigen::MatrixXd& m, int size) {
  if (size < 1 || m.size() == 0) throw InputError("cannot resize an empty matrix");
  if (m.rows() == size && m.cols() == size) return m;
  Eigen::MatrixXd out(size, size);
  for (int r = 0; r < size; ++r) {
    const auto sr = static_cast<Eigen::Index>((static_cast<double>(r) + 0.5) * m.rows() / size);
    for (int c = 0; c < size; ++c) {
      const auto sc = static_cast<Eigen::Index>((static_cast<double>(c) + 0.5) * m.cols() / size);
      out(r, c) = m(std::min(sr, m.rows() - 1), std::min(sc, m.cols() - 1));
    }
  }
  return out;
}

void Sample::validate(const CellGrid& grid) const {
  if (!grid.cell(cell_label).contains(true_x, true_y))
    throw InputError(fmt::format("ground truth ({}, {}) is outside cell {}", true_x, true_y, cell_label));
}

}  // namespace wvfusion
