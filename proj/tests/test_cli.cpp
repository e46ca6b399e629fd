#include "wvfusion/synth_data.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wvfusion;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "wvfusion_cli_test";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code = -1;
  std::string err;
};

Result run(const std::string& args) {
  const fs::path err = kRoot / "stderr.txt";
  const std::string cmd = std::string("\"") + WVFUSION_CLI + "\" " + args + " >" + (kRoot / "stdout.txt").string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path write_config(const std::string& name, const nlohmann::json& j) {
  const fs::path p = kRoot / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

nlohmann::json tiny_config() {
  GeneratorConfig c = GeneratorConfig::benchmark(2);
  c.grid.rows = 2;
  c.grid.cols = 2;
  c.scene = SceneConfig::make(4, {{0, 3}}, 2, 0.03, 16);
  c.plan.rssi_per_position = 40;
  c.plan.photos_per_position = 8;
  c.test_waypoints = {{0.5, 0.5}, {3.5, 0.5}};
  c.test_step = 1.0;
  return c.to_json();
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    if (slurp(e.path()) != slurp(b / fs::relative(e.path(), a))) return false;
    ++n;
  }
  return n > 0;
}

}  // namespace

TEST_CASE("command line workflow") {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);
  const std::string d1 = (kRoot / "d1").string(), d2 = (kRoot / "d2").string();
  const fs::path cfg = write_config("tiny.json", tiny_config());

  REQUIRE(run("--out " + d1 + " generate --config " + cfg.string()).code == 0);
  REQUIRE(run("--out " + d2 + " generate --config " + cfg.string()).code == 0);
  CHECK(same_tree(d1, d2));
  CHECK(run("validate " + d1).code == 0);

  SUBCASE("seed override changes the data") {
    const std::string d3 = (kRoot / "d3").string();
    REQUIRE(run("--seed 9 --out " + d3 + " generate --config " + cfg.string()).code == 0);
    CHECK_FALSE(same_tree(d1, d3));
  }

  SUBCASE("invalid config names the field") {
    nlohmann::json j = tiny_config();
    j["aps"][0]["shadowing_sigma_db"] = -1.0;
    const Result r = run("--out " + (kRoot / "bad").string() + " generate --config " +
                         write_config("bad.json", j).string());
    CHECK(r.code != 0);
    CHECK(r.err.find("shadowing_sigma_db") != std::string::npos);
  }

  SUBCASE("missing dataset") {
    CHECK(run("validate " + (kRoot / "nowhere").string()).code != 0);
    const Result r = run("train --dataset " + (kRoot / "nowhere").string() + " --which wifi");
    CHECK(r.code != 0);
    CHECK(r.err.find("nowhere") != std::string::npos);
  }

  SUBCASE("train, localize, evaluate") {
    const std::string models = (kRoot / "models").string();
    const std::string est = (kRoot / "est").string();
    REQUIRE(run("--out " + models + " train --dataset " + d1 + " --which wifi --epochs 1").code == 0);
    CHECK(fs::exists(fs::path(models) / "wifi.json"));
    CHECK(fs::exists(fs::path(models) / "wifi_log.csv"));

    const Result missing = run("--out " + est + " localize --dataset " + d1 + " --models " + models +
                               " --fusion double-layer");
    CHECK(missing.code != 0);
    CHECK(missing.err.find("visual checkpoint") != std::string::npos);

    REQUIRE(run("--out " + est + " localize --dataset " + d1 + " --models " + models + " --fusion wifi").code == 0);
    const fs::path wifi_csv = fs::path(est) / "wifi.csv";
    REQUIRE(fs::exists(wifi_csv));

    const fs::path ev = kRoot / "eval";
    REQUIRE(run("--out " + ev.string() + " evaluate " + wifi_csv.string()).code == 0);
    CHECK(fs::exists(ev / "report.csv"));
    CHECK(fs::exists(ev / "cdf.csv"));
    CHECK_FALSE(fs::exists(ev / "comparison.svg"));

    const fs::path bad = kRoot / "broken.csv";
    std::ofstream(bad) << "index,truth_x,truth_y,est_x,est_y,est_label,flags\n0,1,1,1,1,0,0\n1,1,1,oops,1,0,0\n";
    const Result r = run("--out " + ev.string() + " evaluate " + bad.string());
    CHECK(r.code != 0);
    CHECK(r.err.find("broken.csv:3") != std::string::npos);
  }

  SUBCASE("usage errors") {
    CHECK(run("").code != 0);
    CHECK(run("frobnicate").code != 0);
    CHECK(run("localize --dataset " + d1 + " --models " + d1 + " --fusion median").code != 0);
  }
}
