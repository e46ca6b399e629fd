#pragma once

#include "wvfusion/core_model.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wvfusion {

struct CdfPoint {
  double level = 0.0;
  double fraction = 0.0;
};

// Metrics of one localization mode over N_test points.
//   rmse = sqrt(mean(dx^2 + dy^2))
//   mae  = mean(|dx| + |dy|)       coordinate-wise L1, not mean Euclidean error
//   std  = population std of the Euclidean errors e_i
struct EvalReport {
  std::string mode_label;
  std::vector<std::pair<int, double>> per_point_errors;
  double rmse = 0.0;
  double mae = 0.0;
  double std = 0.0;
  std::vector<CdfPoint> cdf;

  std::vector<double> errors() const;
};

// 0.0 to 8.0 m in 0.1 m steps.
std::vector<double> default_cdf_levels();

// Throws EmptySetError on empty input and InputError on length mismatch.
EvalReport compute_metrics(std::span<const Point2> estimates, std::span<const Point2> truths,
                           std::string mode_label = {}, std::span<const double> cdf_levels = {});

// Fraction of errors <= each level; levels must be ascending.
std::vector<CdfPoint> compute_cdf(std::span<const double> errors, std::span<const double> levels);

// Nearest-rank percentile (q in (0, 100]).
double percentile(std::span<const double> values, double q);

// Reports ordered by RMSE ascending (mode label breaks ties).
std::vector<EvalReport> sorted_by_rmse(std::vector<EvalReport> reports);

// CSV: comment line documenting the MAE definition, header, one row per mode.
std::string report_table_csv(std::span<const EvalReport> reports);

// CSV: level column followed by one fraction column per mode.
std::string cdf_table_csv(std::span<const EvalReport> reports);

// Grouped RMSE/MAE/STD bar chart and CDF overlay in one SVG document.
std::string comparison_svg(std::span<const EvalReport> reports);

struct TrajectorySeries {
  std::string mode_label;
  std::vector<Point2> estimates;
};

// Ground-truth polyline plus estimated points per mode.
std::string trajectory_svg(std::span<const Point2> truth, std::span<const TrajectorySeries> series);

}  // namespace wvfusion
