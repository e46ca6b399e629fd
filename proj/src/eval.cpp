#include "wvfusion/eval.hpp"

#include "wvfusion/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace wvfusion {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % kPalette.size()]; }

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<double> EvalReport::errors() const {
  std::vector<double> e;
  e.reserve(per_point_errors.size());
  for (const auto& [i, v] : per_point_errors) e.push_back(v);
  return e;
}

std::vector<double> default_cdf_levels() {
  std::vector<double> levels;
  for (int i = 0; i <= 80; ++i) levels.push_back(i / 10.0);
  return levels;
}

EvalReport compute_metrics(std::span<const Point2> estimates, std::span<const Point2> truths, std::string mode_label,
                           std::span<const double> cdf_levels) {
  if (estimates.empty() || truths.empty()) throw EmptySetError("no localization points to evaluate");
  if (estimates.size() != truths.size())
    throw InputError(fmt::format("{} estimates for {} ground-truth points", estimates.size(), truths.size()));
  EvalReport r;
  r.mode_label = std::move(mode_label);
  const double n = static_cast<double>(estimates.size());
  double sq = 0.0, l1 = 0.0, sum_e = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double dx = estimates[i].x - truths[i].x;
    const double dy = estimates[i].y - truths[i].y;
    const double e = std::hypot(dx, dy);
    r.per_point_errors.emplace_back(static_cast<int>(i), e);
    sq += dx * dx + dy * dy;
    l1 += std::abs(dx) + std::abs(dy);
    sum_e += e;
  }
  r.rmse = std::sqrt(sq / n);
  r.mae = l1 / n;
  const double mean_e = sum_e / n;
  double var = 0.0;
  for (const auto& [i, e] : r.per_point_errors) var += (e - mean_e) * (e - mean_e);
  r.std = std::sqrt(var / n);
  const std::vector<double> levels = cdf_levels.empty() ? default_cdf_levels()
                                                        : std::vector<double>(cdf_levels.begin(), cdf_levels.end());
  r.cdf = compute_cdf(r.errors(), levels);
  return r;
}

std::vector<CdfPoint> compute_cdf(std::span<const double> errors, std::span<const double> levels) {
  if (errors.empty()) throw EmptySetError("no errors for CDF");
  if (!std::is_sorted(levels.begin(), levels.end())) throw InputError("CDF levels must be ascending");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  for (double level : levels) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), level) - sorted.begin();
    out.push_back({level, static_cast<double>(count) / static_cast<double>(sorted.size())});
  }
  return out;
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw EmptySetError("no values for percentile");
  if (!(q > 0.0 && q <= 100.0)) throw InputError("percentile must lie in (0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<EvalReport> sorted_by_rmse(std::vector<EvalReport> reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.rmse != b.rmse) return a.rmse < b.rmse;
    return a.mode_label < b.mode_label;
  });
  return reports;
}

std::string report_table_csv(std::span<const EvalReport> reports) {
  std::string out = "# mae = mean(|dx| + |dy|) (coordinate-wise L1); rmse and std use Euclidean errors\n";
  out += "mode,rmse,mae,std,n\n";
  for (const EvalReport& r : sorted_by_rmse({reports.begin(), reports.end()}))
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", r.mode_label, r.rmse, r.mae, r.std, r.per_point_errors.size());
  return out;
}

std::string cdf_table_csv(std::span<const EvalReport> reports) {
  if (reports.empty()) return "level\n";
  std::string out = "level";
  for (const EvalReport& r : reports) out += "," + r.mode_label;
  out += '\n';
  const std::size_t rows = reports.front().cdf.size();
  for (std::size_t i = 0; i < rows; ++i) {
    out += fmt::format("{:.2f}", reports.front().cdf[i].level);
    for (const EvalReport& r : reports) out += fmt::format(",{:.6f}", i < r.cdf.size() ? r.cdf[i].fraction : 1.0);
    out += '\n';
  }
  return out;
}

std::string comparison_svg(std::span<const EvalReport> reports) {
  const std::vector<EvalReport> sorted = sorted_by_rmse({reports.begin(), reports.end()});
  constexpr double kW = 960, kH = 420, kPad = 50, kPanel = 400;
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kW, kH);

  // Left panel: grouped bars of RMSE / MAE / STD per mode.
  double vmax = 1e-9;
  for (const EvalReport& r : sorted) vmax = std::max({vmax, r.rmse, r.mae, r.std});
  vmax = std::ceil(vmax);
  const double plot_h = kH - 2 * kPad;
  svg += fmt::format("<text x=\"{}\" y=\"20\">RMSE / MAE / STD (m)</text>\n", kPad);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kPad, kPad, kH - kPad);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kPad, kH - kPad,
                     kPad + kPanel);
  const double group_w = kPanel / 3.0;
  const double bar_w = group_w / (static_cast<double>(sorted.size()) + 1.0);
  const std::array<const char*, 3> metrics = {"RMSE", "MAE", "STD"};
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const double gx = kPad + m * group_w;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", gx + group_w / 2 - 15, kH - kPad + 18, metrics[m]);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const double v = m == 0 ? sorted[i].rmse : m == 1 ? sorted[i].mae : sorted[i].std;
      const double h = v / vmax * plot_h;
      svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n",
                         gx + (i + 0.5) * bar_w, kH - kPad - h, bar_w * 0.9, h, colour(i));
    }
  }
  svg += fmt::format("<text x=\"5\" y=\"{}\">{:.0f}</text>\n", kPad + 4, vmax);

  // Right panel: CDF polylines.
  const double ox = kW / 2 + kPad;
  const double pw = kPanel;
  svg += fmt::format("<text x=\"{}\" y=\"20\">Error CDF</text>\n", ox);
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", ox, kPad,
                     pw, plot_h);
  double lmax = 1e-9;
  for (const EvalReport& r : sorted)
    if (!r.cdf.empty()) lmax = std::max(lmax, r.cdf.back().level);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::string pts;
    for (const CdfPoint& c : sorted[i].cdf)
      pts += fmt::format("{:.1f},{:.1f} ", ox + c.level / lmax * pw, kH - kPad - c.fraction * plot_h);
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", pts, colour(i));
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", ox + pw - 120,
                       kPad + 20 + 16.0 * i, colour(i), escape_xml(sorted[i].mode_label));
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">error (m), 0 to {:.1f}</text>\n", ox, kH - kPad + 18, lmax);
  svg += "</svg>\n";
  return svg;
}

std::string trajectory_svg(std::span<const Point2> truth, std::span<const TrajectorySeries> series) {
  double min_x = 0, min_y = 0, max_x = 1, max_y = 1;
  bool first = true;
  auto extend = [&](Point2 p) {
    if (first) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      first = false;
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const Point2& p : truth) extend(p);
  for (const TrajectorySeries& s : series)
    for (const Point2& p : s.estimates) extend(p);
  constexpr double kSize = 600, kPad = 40;
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  auto sx = [&](double x) { return kPad + (x - min_x) / span * (kSize - 2 * kPad); };
  auto sy = [&](double y) { return kSize - kPad - (y - min_y) / span * (kSize - 2 * kPad); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kSize);
  std::string pts;
  for (const Point2& p : truth) pts += fmt::format("{:.1f},{:.1f} ", sx(p.x), sy(p.y));
  svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n", pts);
  svg += "<text x=\"10\" y=\"16\">ground truth</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (const Point2& p : series[i].estimates)
      svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.6\"/>\n", sx(p.x),
                         sy(p.y), colour(i));
    svg += fmt::format("<text x=\"10\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", 32 + 16.0 * i, colour(i),
                       escape_xml(series[i].mode_label));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace wvfusion
