#include "wvfusion/errors.hpp"
#include "wvfusion/eval.hpp"

#include <doctest.h>

using namespace wvfusion;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

EvalReport report_for(const std::string& label, double offset) {
  const std::vector<Point2> truth{{0, 0}, {1, 1}, {2, 2}};
  std::vector<Point2> est;
  for (const Point2& p : truth) est.push_back({p.x + offset, p.y});
  return compute_metrics(est, truth, label);
}

}  // namespace

TEST_CASE("metrics examples") {
  const std::vector<Point2> truth{{1, 2}, {3, 4}};
  const EvalReport zero = compute_metrics(truth, truth);
  CHECK(zero.rmse == 0.0);
  CHECK(zero.mae == 0.0);
  CHECK(zero.std == 0.0);

  const std::vector<Point2> t1{{0, 0}};
  const std::vector<Point2> e1{{3, 4}};
  const EvalReport one = compute_metrics(e1, t1);
  CHECK(one.rmse == 5.0);
  CHECK(one.mae == 7.0);
  CHECK(one.std == 0.0);

  const std::vector<Point2> t2{{0, 0}, {5, 5}};
  const std::vector<Point2> e2{{3, 4}, {5, 5}};
  const EvalReport two = compute_metrics(e2, t2);
  CHECK(two.rmse == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
  CHECK(two.mae == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(two.std == doctest::Approx(2.5).epsilon(1e-12));
  REQUIRE(two.per_point_errors.size() == 2);
  CHECK(two.per_point_errors[0].second == doctest::Approx(5.0));
}

TEST_CASE("metrics errors") {
  const std::vector<Point2> none;
  CHECK_THROWS_AS(compute_metrics(none, none), EmptySetError);
  const std::vector<Point2> a{{0, 0}}, b{{0, 0}, {1, 1}};
  CHECK_THROWS_AS(compute_metrics(a, b), InputError);
}

TEST_CASE("std never exceeds rmse") {
  for (double scale : {0.1, 1.0, 7.0}) {
    std::vector<Point2> t, e;
    for (int i = 0; i < 20; ++i) {
      t.push_back({static_cast<double>(i), 0.0});
      e.push_back({i + scale * std::sin(i * 1.3), scale * std::cos(i * 0.7)});
    }
    const EvalReport r = compute_metrics(e, t);
    CHECK(r.std <= r.rmse + 1e-12);
  }
}

TEST_CASE("cdf") {
  const std::vector<double> zeros{0, 0, 0};
  const std::vector<double> levels{0.0, 1.0, 5.0};
  for (const CdfPoint& c : compute_cdf(zeros, levels)) CHECK(c.fraction == 1.0);
  const std::vector<double> e{1, 3};
  const std::vector<double> two{2.0};
  CHECK(compute_cdf(e, two)[0].fraction == 0.5);

  std::vector<double> ten(10, 1.0);
  ten[9] = 3.0;
  const std::vector<double> at2{2.0};
  CHECK(compute_cdf(ten, at2)[0].fraction == doctest::Approx(0.9));

  const auto levels_default = default_cdf_levels();
  CHECK(levels_default.size() == 81);
  CHECK(levels_default.back() == doctest::Approx(8.0));
}

TEST_CASE("percentile") {
  const std::vector<double> v{5, 1, 4, 2, 3, 6, 7, 8, 9, 10};
  CHECK(percentile(v, 90.0) == 9.0);
  CHECK(percentile(v, 100.0) == 10.0);
  CHECK(percentile(v, 10.0) == 1.0);
}

TEST_CASE("report ordering and tables") {
  const std::vector<EvalReport> sorted =
      sorted_by_rmse({report_for("c", 3.0), report_for("a", 1.0), report_for("b", 2.0)});
  CHECK(sorted[0].mode_label == "a");
  CHECK(sorted[2].mode_label == "c");

  const std::string t1 = report_table_csv(sorted);
  CHECK(t1 == report_table_csv(sorted));
  CHECK(t1.find("|dx| + |dy|") != std::string::npos);
  CHECK(t1.find("a,") < t1.find("b,"));

  const std::vector<EvalReport> four{report_for("wifi", 2.0), report_for("visual", 1.0), report_for("joint", 1.5),
                                     report_for("double-layer", 0.5)};
  const std::string svg = comparison_svg(four);
  CHECK(svg == comparison_svg(four));
  CHECK(count(svg, "<polyline") == 4);
  const std::string cdf = cdf_table_csv(four);
  CHECK(cdf.substr(0, cdf.find('\n')) == "level,wifi,visual,joint,double-layer");
}
