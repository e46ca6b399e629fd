#include "wvfusion/errors.hpp"
#include "wvfusion/fusion.hpp"
#include "wvfusion/random.hpp"

#include <doctest.h>

#include <initializer_list>

using namespace wvfusion;

namespace {

LikelihoodVector lv(std::initializer_list<double> v, LikelihoodSource s = LikelihoodSource::wifi) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return LikelihoodVector(p, s);
}

LikelihoodVector random_lv(Rng& rng, int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = rng.uniform() + 1e-3;
  return LikelihoodVector::normalized(w, LikelihoodSource::wifi);
}

void check_close(const LikelihoodVector& p, std::initializer_list<double> want, double tol = 1e-4) {
  REQUIRE(p.size() == static_cast<int>(want.size()));
  int i = 0;
  for (double w : want) CHECK(std::abs(p[i++] - w) <= tol);
}

int count_nonzero(const LikelihoodVector& p) { return static_cast<int>((p.probs().array() > 0.0).count()); }

}  // namespace

TEST_CASE("stack_joint_channels") {
  const WifiFeatureSet w{Eigen::MatrixXd::Zero(8, 8), Eigen::MatrixXd::Zero(8, 8), Eigen::MatrixXd::Zero(8, 8),
                         Eigen::MatrixXd::Zero(8, 8)};
  const Eigen::MatrixXd img = Eigen::MatrixXd::Constant(8, 8, 0.25);
  CHECK(stack_joint_channels(w, ImageGroup({img, img, img, img}, {0, 90, 180, 270})).size() == 8);
  const ChannelStack one = stack_joint_channels(w, ImageGroup({img}, {0}));
  CHECK(one.size() == 5);
  CHECK(one[4] == img);
  CHECK_THROWS_AS(stack_joint_channels(w, ImageGroup({Eigen::MatrixXd::Zero(4, 4)}, {0})), InputError);
}

TEST_CASE("hadamard examples") {
  check_close(hadamard_fuse({lv({0.5, 0.5}), lv({0.5, 0.5}), lv({0.5, 0.5})}).probs, {0.5, 0.5});
  const FusionResult r = hadamard_fuse({lv({0.6, 0.4}), lv({0.7, 0.3}), lv({0.5, 0.5})});
  check_close(r.probs, {0.7778, 0.2222});
  CHECK_FALSE(r.flagged);
  CHECK(r.probs.source() == LikelihoodSource::hadamard);
}

TEST_CASE("hadamard underflow falls back to uniform and flags") {
  const FusionResult r = hadamard_fuse({lv({1.0, 0.0}), lv({0.0, 1.0}), lv({0.5, 0.5})});
  CHECK(r.flagged);
  check_close(r.probs, {0.5, 0.5}, 0.0);
  Eigen::VectorXd tiny(2);
  tiny << 1e-200, 1.0 - 1e-200;
  const LikelihoodVector t(tiny, LikelihoodSource::wifi);
  const FusionResult u = hadamard_fuse({t, t, lv({1.0, 0.0})});
  CHECK(u.flagged);
}

TEST_CASE("hadamard with a uniform factor") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const LikelihoodVector a = random_lv(rng, 9), b = random_lv(rng, 9);
    const FusionResult r = hadamard_fuse({a, LikelihoodVector::uniform(9, LikelihoodSource::visual), b});
    const Eigen::VectorXd want = a.probs().cwiseProduct(b.probs()) / a.probs().dot(b.probs());
    CHECK((r.probs.probs() - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("median examples") {
  check_close(median_fuse(lv({0.8, 0.2}), lv({0.1, 0.9}), lv({0.6, 0.4})), {0.6, 0.4}, 1e-12);
  const LikelihoodVector p = lv({0.2, 0.3, 0.5});
  check_close(median_fuse(p, p, p), {0.2, 0.3, 0.5}, 1e-12);
  CHECK(median_fuse(p, p, p).source() == LikelihoodSource::final);

  // Spike at index 0 in p_v; the other two are small there.
  const LikelihoodVector a = lv({0.05, 0.45, 0.5});
  const LikelihoodVector spike = lv({0.9, 0.05, 0.05});
  const LikelihoodVector c = lv({0.1, 0.5, 0.4});
  const Eigen::Vector3d med(0.1, 0.45, 0.4);
  const LikelihoodVector m = median_fuse(a, spike, c);
  CHECK((m.probs() - med / med.sum()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(m[0] < spike[0]);
}

TEST_CASE("double layer composes hadamard and median") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const FusionInput in{random_lv(rng, 7), random_lv(rng, 7), random_lv(rng, 7)};
    const FusionResult r = double_layer_fuse(in);
    const LikelihoodVector want = median_fuse(in.p_w, in.p_v, hadamard_fuse(in).probs);
    CHECK((r.probs.probs() - want.probs()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.probs.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("decide") {
  const CellGrid g3 = CellGrid::regular(1, 3, 2.0, 2.0);
  CHECK(decide(lv({0.1, 0.7, 0.2}), g3).label == 1);
  CHECK(decide(lv({0.1, 0.7, 0.2}), g3).x == doctest::Approx(3.0));
  CHECK(decide(lv({0.5, 0.5}), CellGrid::regular(1, 2, 2.0, 2.0)).label == 0);
  const CellGrid g25 = CellGrid::regular(5, 5, 2.0, 2.0);
  CHECK(decide(LikelihoodVector::uniform(25, LikelihoodSource::final), g25).label == 0);
  CHECK_THROWS_AS(decide(lv({0.5, 0.5}), g3), InputError);
}

TEST_CASE("distance threshold") {
  const CellGrid g = CellGrid::regular(5, 5, 2.0, 2.0);
  Rng rng(25);
  const LikelihoodVector pw = random_lv(rng, 25), pv = random_lv(rng, 25);
  const FusionResult all = distance_threshold_fuse(pw, pv, g, g.diameter());
  CHECK((all.probs.probs() - pv.probs()).cwiseAbs().maxCoeff() <= 1e-15);
  const FusionResult one = distance_threshold_fuse(pw, pv, g, 1.0);
  CHECK(count_nonzero(one.probs) == 1);
  CHECK(one.probs[decide(pw, g).label] == doctest::Approx(1.0));

  // Three cells in a row: A = 0, C = 1, B = 2; d = 2.5 keeps A and C.
  const CellGrid row = CellGrid::regular(1, 3, 2.0, 2.0);
  const FusionResult r = distance_threshold_fuse(lv({0.8, 0.1, 0.1}), lv({0.1, 0.3, 0.6}), row, 2.5);
  CHECK(decide(r.probs, row).label == 1);
  check_close(r.probs, {0.25, 0.75, 0.0}, 1e-12);

  const FusionResult empty = distance_threshold_fuse(lv({1.0, 0.0, 0.0}), lv({0.0, 0.0, 1.0}), row, 1.0);
  CHECK(empty.flagged);
  check_close(empty.probs, {0.0, 0.0, 1.0}, 0.0);
  CHECK_THROWS_AS(distance_threshold_fuse(pw, pv, g, 0.0), ConfigError);
}

TEST_CASE("probability threshold") {
  check_close(probability_threshold_fuse(lv({0.5, 0.3, 0.2}), lv({0.1, 0.2, 0.7}), 0.7).probs, {0.3333, 0.6667, 0.0});
  Rng rng(27);
  const LikelihoodVector a = random_lv(rng, 10), b = random_lv(rng, 10);
  CHECK((probability_threshold_fuse(a, b, 1.0).probs.probs() - b.probs()).cwiseAbs().maxCoeff() <= 1e-15);
  for (double gamma : {0.1, 0.5, 0.99}) {
    const FusionResult r = probability_threshold_fuse(lv({0.0, 1.0, 0.0}), lv({0.2, 0.3, 0.5}), gamma);
    check_close(r.probs, {0.0, 1.0, 0.0}, 1e-15);
  }
  CHECK_THROWS_AS(probability_threshold_fuse(a, b, 0.0), ConfigError);
  CHECK_THROWS_AS(probability_threshold_fuse(a, b, 1.5), ConfigError);
}

TEST_CASE("top-k") {
  check_close(topk_fuse(lv({0.4, 0.35, 0.25}), lv({0.0, 0.5, 0.5}), 2).probs, {0.0, 1.0, 0.0}, 1e-15);
  Rng rng(29);
  const LikelihoodVector a = random_lv(rng, 10), b = random_lv(rng, 10);
  CHECK((topk_fuse(a, b, 10).probs.probs() - b.probs()).cwiseAbs().maxCoeff() <= 1e-15);
  const FusionResult one = topk_fuse(a, b, 1);
  Eigen::Index best = 0;
  a.probs().maxCoeff(&best);
  CHECK(one.probs[static_cast<int>(best)] == doctest::Approx(1.0));
  // Ties in p_primary go to the smaller index.
  check_close(topk_fuse(lv({0.25, 0.25, 0.25, 0.25}), lv({0.1, 0.2, 0.3, 0.4}), 2).probs, {1.0 / 3, 2.0 / 3, 0, 0},
              1e-12);
  CHECK_THROWS_AS(topk_fuse(a, b, 0), ConfigError);
  CHECK_THROWS_AS(topk_fuse(a, b, 11), ConfigError);
}

TEST_CASE("candidate sets grow as the constraint relaxes") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const LikelihoodVector a = random_lv(rng, 12), b = random_lv(rng, 12);
    int prev = 0;
    for (double gamma : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95, 1.0}) {
      const int n = count_nonzero(probability_threshold_fuse(a, b, gamma).probs);
      CHECK(n >= prev);
      prev = n;
    }
    CHECK(prev == 12);
    for (int k = 1; k <= 12; ++k) CHECK(count_nonzero(topk_fuse(a, b, k).probs) == k);
  }
}

TEST_CASE("every mode yields a valid vector") {
  const CellGrid g = CellGrid::regular(5, 5, 2.0, 2.0);
  const BaselineParams params;
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const LikelihoodVector pw = random_lv(rng, 25), pv = random_lv(rng, 25), pwv = random_lv(rng, 25);
    for (FusionMode mode : {FusionMode::wifi, FusionMode::visual, FusionMode::joint, FusionMode::hadamard,
                            FusionMode::double_layer, FusionMode::dist_thresh, FusionMode::prob_thresh,
                            FusionMode::topk}) {
      const FusionResult r = fuse(mode, pw, pv, pwv, g, params);
      CHECK(r.probs.size() == 25);
      CHECK(r.probs.probs().sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.probs.probs().minCoeff() >= 0.0);
      CHECK(parse_fusion_mode(to_string(mode)) == mode);
    }
  }
  CHECK_THROWS_AS(fuse(FusionMode::hadamard, std::nullopt, random_lv(rng, 25), random_lv(rng, 25), g, params),
                  InputError);
  CHECK_FALSE(parse_fusion_mode("median").has_value());
}
