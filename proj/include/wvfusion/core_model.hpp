#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace wvfusion {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point2 a, Point2 b);

// One axis-aligned class area of the floor plan.
struct Cell {
  int label = 0;
  double centre_x = 0.0;
  double centre_y = 0.0;
  double half_width = 0.0;
  double half_height = 0.0;

  Point2 centre() const { return {centre_x, centre_y}; }
  bool contains(double x, double y, double tol = 1e-9) const;
};

// Partition of the floor plan into N >= 2 disjoint labelled rectangles.
class CellGrid {
 public:
  explicit CellGrid(std::vector<Cell> cells);

  // rows x cols cells of size cell_width x cell_height; label = row * cols + col,
  // row 0 at origin_y.
  static CellGrid regular(int rows, int cols, double cell_width, double cell_height,
                          double origin_x = 0.0, double origin_y = 0.0);

  int size() const { return static_cast<int>(cells_.size()); }
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int label) const;

  Point2 label_to_centre(int label) const;

  // Unique cell containing the point; shared edges go to the smaller label.
  int point_to_label(double x, double y) const;
  int point_to_label(Point2 p) const { return point_to_label(p.x, p.y); }
  bool contains(Point2 p) const;

  // Axis-aligned bounding box of all cells.
  double min_x() const { return min_x_; }
  double min_y() const { return min_y_; }
  double max_x() const { return max_x_; }
  double max_y() const { return max_y_; }
  // Diagonal of the bounding box; upper bound for any in-map error.
  double diameter() const;

 private:
  std::vector<Cell> cells_;
  double min_x_ = 0.0, min_y_ = 0.0, max_x_ = 0.0, max_y_ = 0.0;
};

inline constexpr double kMissingRssiDbm = -100.0;

// M x K block of RSSI samples (rows = samples, columns = access points).
class RssiBlock {
 public:
  RssiBlock(Eigen::MatrixXd values, std::vector<std::string> ap_ids, bool standardized = false);

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& ap_ids() const { return ap_ids_; }
  bool standardized() const { return standardized_; }
  int samples() const { return static_cast<int>(values_.rows()); }
  int access_points() const { return static_cast<int>(values_.cols()); }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> ap_ids_;
  bool standardized_;
};

// S grayscale views taken at one position, pixel values in [0, 1].
class ImageGroup {
 public:
  ImageGroup(std::vector<Eigen::MatrixXd> images, std::vector<double> headings_deg);

  const std::vector<Eigen::MatrixXd>& images() const { return images_; }
  const std::vector<double>& headings() const { return headings_; }
  int size() const { return static_cast<int>(images_.size()); }
  int height() const { return static_cast<int>(images_.front().rows()); }
  int width() const { return static_cast<int>(images_.front().cols()); }

 private:
  std::vector<Eigen::MatrixXd> images_;
  std::vector<double> headings_;
};

enum class LikelihoodSource { wifi, visual, joint, hadamard, final };

std::string_view to_string(LikelihoodSource source);

inline constexpr double kLikelihoodSumTolerance = 1e-6;

// Probability vector over the N cells. Construction checks non-negativity and
// sum-to-one; use `normalized` to build one from unnormalized weights.
class LikelihoodVector {
 public:
  LikelihoodVector(Eigen::VectorXd probs, LikelihoodSource source);

  // Scales non-negative weights to unit sum. Throws InputError if they sum to 0.
  static LikelihoodVector normalized(const Eigen::VectorXd& weights, LikelihoodSource source);
  static LikelihoodVector uniform(int n, LikelihoodSource source);

  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](int i) const { return probs_[i]; }
  int size() const { return static_cast<int>(probs_.size()); }
  LikelihoodSource source() const { return source_; }

 private:
  Eigen::VectorXd probs_;
  LikelihoodSource source_;
};

// A stack of equally sized square image channels.
using ChannelStack = std::vector<Eigen::MatrixXd>;

// Nearest-neighbour resampling of a matrix to size x size.
Eigen::MatrixXd resize_nearest(const Eigen::MatrixXd& m, int size);

// One WiFi-visual training or test record.
struct Sample {
  int cell_label = 0;
  RssiBlock rssi;
  ImageGroup images;
  double true_x = 0.0;
  double true_y = 0.0;

  // Throws InputError unless the ground truth lies in the labelled cell.
  void validate(const CellGrid& grid) const;
};

}  // namespace wvfusion
