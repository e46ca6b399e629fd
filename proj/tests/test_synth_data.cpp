#include "wvfusion/errors.hpp"
#include "wvfusion/synth_data.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wvfusion;
namespace fs = std::filesystem;

namespace {

ApConfig ap(Point2 pos, double tx, double eta, double sigma) { return {"ap", pos, tx, eta, sigma}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GeneratorConfig tiny_config(std::uint64_t seed) {
  GeneratorConfig c = GeneratorConfig::benchmark(seed);
  c.grid.rows = 2;
  c.grid.cols = 2;
  c.scene = SceneConfig::make(4, {{0, 3}}, seed, 0.03, 16);
  c.plan.rssi_per_position = 40;
  c.plan.photos_per_position = 8;
  c.test_waypoints = {{0.5, 0.5}, {3.5, 3.5}};
  c.test_step = 1.0;
  return c;
}

}  // namespace

TEST_CASE("simulate_rssi path loss") {
  Rng rng(1);
  const std::vector<ApConfig> far{ap({10.0, 0.0}, -30.0, 2.0, 0.0)};
  CHECK(simulate_rssi({0.0, 0.0}, far, rng)[0] == doctest::Approx(-50.0).epsilon(1e-12));
  const std::vector<ApConfig> here{ap({1.0, 1.0}, -40.0, 3.0, 0.0)};
  CHECK(simulate_rssi({1.0, 1.0}, here, rng)[0] == doctest::Approx(-10.0).epsilon(1e-12));
  const std::vector<ApConfig> weak{ap({0.0, 0.0}, -60.0, 4.0, 0.0)};
  CHECK(simulate_rssi({30.0, 0.0}, weak, rng)[0] == kMissingRssiDbm);

  const std::vector<ApConfig> noisy{ap({0, 0}, -40, 3, 4), ap({5, 5}, -40, 3, 4)};
  Rng a(9), b(9);
  CHECK(simulate_rssi({2, 2}, noisy, a) == simulate_rssi({2, 2}, noisy, b));

  double prev = 1e9;
  for (double d = 0.2; d < 20.0; d += 0.7) {
    const double v = simulate_rssi({d, 0.0}, weak, rng)[0];
    if (v == kMissingRssiDbm) break;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("ap validation names the field") {
  GeneratorConfig c = GeneratorConfig::benchmark(0);
  c.aps[1].shadowing_sigma_db = -1.0;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field().find("shadowing_sigma_db") != std::string::npos);
  }
  c = GeneratorConfig::benchmark(0);
  c.aps[0].path_loss_exponent = 7.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GeneratorConfig::benchmark(0);
  c.scene.aliasing_pairs.push_back({2, 2});
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GeneratorConfig::benchmark(0);
  c.plan.rssi_per_position = 1001;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(GeneratorConfig::benchmark(0).validate());
}

TEST_CASE("collection plan headings") {
  const CollectionPlan plan;
  CHECK(plan.rssi_groups() == 100);
  CHECK(plan.photo_groups() == 100);
  for (int g : {0, 1, 37, 99})
    for (int i = 0; i < 4; ++i) CHECK(plan.heading(g, i) == doctest::Approx(std::fmod(g * 3.6 + i * 90.0, 360.0)));
  CHECK(plan.heading(1, 0) - plan.heading(0, 0) == doctest::Approx(3.6));
}

TEST_CASE("collect_position with the default plan") {
  GeneratorConfig c = GeneratorConfig::benchmark(0);
  const CellGrid grid = c.make_grid();
  Rng rng(3);
  const PositionCollection pc = collect_position(7, c.plan, c.aps, c.scene, grid, rng);
  CHECK(pc.rssi.rows() == 1000);
  CHECK(pc.photos.size() == 100);
  std::vector<std::string> ids;
  for (const ApConfig& a : c.aps) ids.push_back(a.id);
  const auto blocks = pc.rssi_groups(c.plan, ids);
  REQUIRE(blocks.size() == 100);
  CHECK(blocks[0].values().rows() == 10);
  CHECK(blocks[0].values().cols() == static_cast<Eigen::Index>(c.aps.size()));
  const auto groups = pc.photo_groups(c.plan);
  REQUIRE(groups.size() == 100);
  CHECK(groups[5].size() == 4);
  CHECK(groups[5].headings()[1] == doctest::Approx(5 * 3.6 + 90.0));
}

TEST_CASE("association counts") {
  CHECK(association_pairs(100, 100, AssociationMode::full).size() == 10000);
  CHECK(association_pairs(10, 10, AssociationMode::diagonal).size() == 10);
  CHECK(association_pairs(3, 5, AssociationMode::full).size() == 15);
  CHECK(association_pairs(3, 5, AssociationMode::diagonal).size() == 3);

  Eigen::MatrixXd v(2, 2);
  v << -50, -60, -55, -65;
  const std::vector<RssiBlock> rssi(3, RssiBlock(v, {"a", "b"}));
  const std::vector<ImageGroup> photos(5, ImageGroup({Eigen::MatrixXd::Zero(4, 4)}, {0.0}));
  const auto samples = associate(rssi, photos, AssociationMode::full, 2, {5.0, 1.0});
  CHECK(samples.size() == 15);
  CHECK(samples.front().cell_label == 2);
}

TEST_CASE("trajectory") {
  const CellGrid grid = CellGrid::regular(6, 6, 2.0, 2.0);
  const std::vector<Point2> line{{1.0, 1.0}, {11.0, 1.0}};
  const auto pts = generate_trajectory(grid, line, 1.0);
  CHECK(pts.size() == 11);
  for (const TrajectoryPoint& p : pts) CHECK(p.label == grid.point_to_label(p.position));
  const std::vector<Point2> single{{3.0, 3.0}};
  const auto one = generate_trajectory(grid, single, 0.5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].position.x == 3.0);
  const std::vector<Point2> outside{{1.0, 1.0}, {50.0, 1.0}};
  CHECK_THROWS_AS(generate_trajectory(grid, outside, 1.0), OutOfMapError);
}

TEST_CASE("rendered views") {
  GeneratorConfig c = GeneratorConfig::benchmark(0);
  c.scene.noise_sigma = 0.0;
  const CellGrid grid = c.make_grid();
  Rng rng(5);
  const auto view = [&](int label, double heading) {
    return render_view(grid.label_to_centre(label), heading, c.scene, grid, rng);
  };
  CHECK(view(6, 36.0).rows() == 58);
  CHECK(view(6, 36.0) == view(6, 36.0));
  for (const auto& [a, b] : c.scene.aliasing_pairs)
    for (double h : {0.0, 90.0, 212.4}) CHECK(view(a, h) == view(b, h));
  // Separation between cells: mean over all 100 headings of the per-view mean absolute difference.
  std::vector<std::vector<Eigen::MatrixXd>> views(static_cast<std::size_t>(grid.size()));
  for (int l = 0; l < grid.size(); ++l)
    for (int h = 0; h < 100; ++h) views[static_cast<std::size_t>(l)].push_back(view(l, h * 3.6));
  double min_mad = 1e9;
  for (int a = 0; a < grid.size(); ++a)
    for (int b = a + 1; b < grid.size(); ++b) {
      bool pair = false;
      for (const auto& [x, y] : c.scene.aliasing_pairs) pair = pair || (x == a && y == b) || (x == b && y == a);
      if (pair) continue;
      double sum = 0.0;
      for (int h = 0; h < 100; ++h)
        sum += (views[static_cast<std::size_t>(a)][static_cast<std::size_t>(h)] -
                views[static_cast<std::size_t>(b)][static_cast<std::size_t>(h)])
                   .cwiseAbs()
                   .mean();
      min_mad = std::min(min_mad, sum / 100.0);
    }
  CHECK(min_mad > 0.1);
}

TEST_CASE("generated datasets are deterministic") {
  const fs::path root = fs::temp_directory_path() / "wvfusion_synth_test";
  fs::remove_all(root);
  generate_dataset(tiny_config(4), root / "a");
  generate_dataset(tiny_config(4), root / "b");
  generate_dataset(tiny_config(5), root / "c");
  CHECK(validate_dataset(root / "a").empty());
  std::size_t files = 0;
  bool any_difference = false;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    CHECK(slurp(e.path()) == slurp(root / "b" / rel));
    if (fs::exists(root / "c" / rel) && slurp(e.path()) != slurp(root / "c" / rel)) any_difference = true;
    ++files;
  }
  CHECK(files > 10);
  CHECK(any_difference);

  const Dataset d = load_dataset(root / "a");
  CHECK(d.grid.size() == 4);
  CHECK(d.cells[0].rssi_groups.size() == 4);
  CHECK(d.cells[0].photo_groups.size() == 8);
  CHECK(d.test.size() == 6);
  for (const Sample& s : d.test) CHECK_NOTHROW(s.validate(d.grid));
  fs::remove_all(root);
}

TEST_CASE("generator config json round trip") {
  const GeneratorConfig c = GeneratorConfig::benchmark(3);
  const GeneratorConfig r = GeneratorConfig::from_json(c.to_json());
  CHECK(r.to_json() == c.to_json());
  nlohmann::json j = c.to_json();
  j["aps"][0]["shadowing_sigma_db"] = -2.0;
  CHECK_THROWS_AS(GeneratorConfig::from_json(j), ConfigError);
}
