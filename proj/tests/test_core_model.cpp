#include "wvfusion/core_model.hpp"
#include "wvfusion/errors.hpp"

#include <doctest.h>

using namespace wvfusion;

TEST_CASE("label_to_centre") {
  const CellGrid single({Cell{0, 0.0, 0.0, 1.0, 1.0}, Cell{1, 2.0, 0.0, 1.0, 1.0}});
  CHECK(single.label_to_centre(0).x == 0.0);
  CHECK(single.label_to_centre(0).y == 0.0);

  const CellGrid grid = CellGrid::regular(5, 5, 2.0, 2.0);
  CHECK(grid.label_to_centre(12).x == doctest::Approx(5.0));
  CHECK(grid.label_to_centre(12).y == doctest::Approx(5.0));
  CHECK_THROWS_AS(grid.label_to_centre(25), RangeError);
  CHECK_THROWS_AS(grid.label_to_centre(-1), RangeError);
}

TEST_CASE("point_to_label") {
  const CellGrid grid = CellGrid::regular(5, 5, 2.0, 2.0);
  CHECK(grid.point_to_label(grid.label_to_centre(0)) == 0);
  // Cells 3 and 4 share the edge x = 8.
  CHECK(grid.point_to_label(8.0, 1.0) == 3);
  CHECK_THROWS_AS(grid.point_to_label(1000.0, 1000.0), OutOfMapError);
  for (int l = 0; l < grid.size(); ++l) CHECK(grid.point_to_label(grid.label_to_centre(l)) == l);
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(CellGrid({Cell{0, 0, 0, 1, 1}}), InputError);
  CHECK_THROWS_AS(CellGrid({Cell{0, 0, 0, 1, 1}, Cell{2, 5, 0, 1, 1}}), InputError);
  CHECK_THROWS_AS(CellGrid({Cell{0, 0, 0, 1, 1}, Cell{1, 1, 0, 1, 1}}), InputError);
  CHECK_THROWS_AS(CellGrid({Cell{0, 0, 0, 1, 1}, Cell{0, 5, 0, 1, 1}}), InputError);
  const CellGrid grid = CellGrid::regular(5, 5, 2.0, 2.0);
  CHECK(grid.diameter() == doctest::Approx(std::sqrt(200.0)));
}

TEST_CASE("rssi block invariants") {
  const std::vector<std::string> ids{"a", "b"};
  CHECK_THROWS_AS(RssiBlock(Eigen::MatrixXd::Zero(1, 2), ids), InsufficientSamplesError);
  CHECK_THROWS_AS(RssiBlock(Eigen::MatrixXd::Zero(3, 1), {"a"}), InputError);
  CHECK_THROWS_AS(RssiBlock(Eigen::MatrixXd::Zero(3, 2), {"a"}), InputError);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 3, 4;
  CHECK_THROWS_AS(RssiBlock(bad, ids, true), InputError);
  Eigen::MatrixXd good(2, 2);
  good << 1, 0, -1, 0;
  CHECK_NOTHROW(RssiBlock(good, ids, true));
}

TEST_CASE("image group invariants") {
  const Eigen::MatrixXd img = Eigen::MatrixXd::Constant(4, 4, 0.5);
  CHECK_NOTHROW(ImageGroup({img, img}, {350.0, 10.0}));
  CHECK_THROWS_AS(ImageGroup({img, img}, {10.0, 10.0}), InputError);
  CHECK_THROWS_AS(ImageGroup({img, Eigen::MatrixXd::Zero(3, 3)}, {0.0, 90.0}), InputError);
  CHECK_THROWS_AS(ImageGroup({Eigen::MatrixXd::Constant(4, 4, 1.5)}, {0.0}), InputError);
  CHECK_THROWS_AS(ImageGroup({}, {}), InputError);
}

TEST_CASE("likelihood vector invariants") {
  Eigen::VectorXd p(3);
  p << 0.2, 0.3, 0.5;
  CHECK_NOTHROW(LikelihoodVector(p, LikelihoodSource::wifi));
  p << 0.2, 0.3, 0.6;
  CHECK_THROWS_AS(LikelihoodVector(p, LikelihoodSource::wifi), InputError);
  p << -0.1, 0.6, 0.5;
  CHECK_THROWS_AS(LikelihoodVector(p, LikelihoodSource::wifi), InputError);
  p << 2, 2, 4;
  const auto n = LikelihoodVector::normalized(p, LikelihoodSource::final);
  CHECK(n[2] == doctest::Approx(0.5));
  CHECK(LikelihoodVector::uniform(4, LikelihoodSource::final)[3] == doctest::Approx(0.25));
  CHECK_THROWS_AS(LikelihoodVector::normalized(Eigen::VectorXd::Zero(3), LikelihoodSource::final), InputError);
}

TEST_CASE("sample ground truth lies in its cell") {
  const CellGrid grid = CellGrid::regular(2, 2, 2.0, 2.0);
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(2, 2, -60.0);
  const RssiBlock rssi(v, {"a", "b"});
  const ImageGroup images({Eigen::MatrixXd::Zero(4, 4)}, {0.0});
  CHECK_NOTHROW((Sample{3, rssi, images, 3.0, 3.0}.validate(grid)));
  CHECK_THROWS_AS((Sample{0, rssi, images, 3.0, 3.0}.validate(grid)), InputError);
}

TEST_CASE("resize_nearest") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  const Eigen::MatrixXd r = resize_nearest(m, 4);
  CHECK(r(0, 0) == 1);
  CHECK(r(1, 1) == 1);
  CHECK(r(0, 3) == 2);
  CHECK(r(3, 0) == 3);
  CHECK(r(3, 3) == 4);
  CHECK(resize_nearest(m, 2) == m);
}
