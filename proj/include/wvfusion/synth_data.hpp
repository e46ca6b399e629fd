#pragma once

#include "wvfusion/core_model.hpp"
#include "wvfusion/dataset_io.hpp"
#include "wvfusion/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wvfusion {

// Readings below this level are reported as kMissingRssiDbm.
inline constexpr double kRssiFloorDbm = -95.0;
// Distances are clamped to this radius before the log in the path-loss model.
inline constexpr double kMinPathDistance = 0.1;

struct ApConfig {
  std::string id;
  Point2 position;
  double tx_power_dbm = -40.0;
  double path_loss_exponent = 3.0;
  double shadowing_sigma_db = 4.0;

  void validate() const;
};

struct SceneConfig {
  std::map<int, std::uint64_t> texture_seed_per_cell;
  std::vector<std::pair<int, int>> aliasing_pairs;
  double noise_sigma = 0.03;
  int image_size = 58;
  double field_of_view_deg = 60.0;

  // Seeds derived from `seed` for every cell; the second cell of each aliasing
  // pair takes the first one's seed.
  static SceneConfig make(int num_cells, std::vector<std::pair<int, int>> aliasing_pairs, std::uint64_t seed,
                          double noise_sigma = 0.03, int image_size = 58);

  std::uint64_t texture_seed(int label) const;
  void validate(int num_cells) const;
};

struct CollectionPlan {
  int rssi_per_position = 1000;
  int photos_per_position = 100;
  int rssi_group_size = 10;  // M
  int photos_per_group = 4;  // S
  double rotation_step_deg = 3.6;

  int rssi_groups() const { return rssi_per_position / rssi_group_size; }
  int photo_groups() const { return photos_per_position; }
  // Heading of image s in photo group g: (g + s * P/S) * step, mod 360.
  double heading(int group, int s) const;
  void validate() const;
};

// Test-time perturbation standing in for a changed environment.
struct DriftConfig {
  bool enabled = false;
  double ap_power_offset_db = 0.0;
  double brightness_shift = 0.0;
};

// Log-distance path loss with Gaussian shadowing, one reading per AP.
Eigen::VectorXd simulate_rssi(Point2 pos, std::span<const ApConfig> aps, Rng& rng, double power_offset_db = 0.0);

// Procedural panorama window of the cell containing `pos`, at `heading`
// quantized to `rotation_step_deg`, plus clamped Gaussian pixel noise.
Eigen::MatrixXd render_view(Point2 pos, double heading_deg, const SceneConfig& scene, const CellGrid& grid, Rng& rng,
                            double rotation_step_deg = 3.6, double brightness_shift = 0.0);

struct PositionCollection {
  Eigen::MatrixXd rssi;  // rssi_per_position x K
  std::vector<Eigen::MatrixXd> photos;
  std::vector<double> headings;

  std::vector<RssiBlock> rssi_groups(const CollectionPlan& plan, const std::vector<std::string>& ap_ids) const;
  std::vector<ImageGroup> photo_groups(const CollectionPlan& plan) const;
};

// All raw RSSI readings and photos taken at the centre of cell `label`.
PositionCollection collect_position(int label, const CollectionPlan& plan, std::span<const ApConfig> aps,
                                    const SceneConfig& scene, const CellGrid& grid, Rng& rng);

// WiFi-visual samples of one position from its RSSI and photo groups.
std::vector<Sample> associate(std::span<const RssiBlock> rssi_groups, std::span<const ImageGroup> photo_groups,
                              AssociationMode mode, int label, Point2 truth);

struct TrajectoryPoint {
  Point2 position;
  int label = 0;
};

// Piecewise-linear path through `waypoints`, sampled every `step` metres.
std::vector<TrajectoryPoint> generate_trajectory(const CellGrid& grid, std::span<const Point2> waypoints, double step);

struct GridSpec {
  int rows = 5;
  int cols = 5;
  double cell_width = 2.0;
  double cell_height = 2.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  GridSpec grid;
  std::vector<ApConfig> aps;
  SceneConfig scene;
  CollectionPlan plan;
  AssociationMode association = AssociationMode::diagonal;
  std::vector<Point2> test_waypoints;
  double test_step = 0.5;
  DriftConfig drift;

  CellGrid make_grid() const;
  // Throws ConfigError naming the first invalid field.
  void validate() const;

  // Desk-scale benchmark: 5x5 grid of 2 m cells, 8 APs, 4 aliasing pairs.
  static GeneratorConfig benchmark(std::uint64_t seed);

  nlohmann::json to_json() const;
  // Missing keys fall back to benchmark() defaults; bad values throw ConfigError.
  static GeneratorConfig from_json(const nlohmann::json& j);
  static GeneratorConfig load(const std::filesystem::path& path);
};

// Writes the full dataset directory (training cells + test trajectory).
void generate_dataset(const GeneratorConfig& config, const std::filesystem::path& out_dir);

}  // namespace wvfusion
