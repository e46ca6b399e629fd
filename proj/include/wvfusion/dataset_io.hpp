#pragma once

#include "wvfusion/core_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wvfusion {

// Dataset directory layout:
//   manifest.json
//   cells/<label>/rssi_<g>.csv       M rows x K columns, raw dBm, no header
//   cells/<label>/img_<g>_<s>.pgm    binary 8-bit PGM
//   test/trajectory.csv              index,x,y,label,photo_group
//   test/rssi_<i>.csv, test/img_<i>_<s>.pgm

enum class AssociationMode { diagonal, full };

std::string_view to_string(AssociationMode mode);
std::optional<AssociationMode> parse_association_mode(std::string_view name);

// (rssi group, photo group) index pairs: every combination for `full`,
// (g, g) for g < min(G_w, G_i) for `diagonal`.
std::vector<std::pair<int, int>> association_pairs(int rssi_groups, int photo_groups, AssociationMode mode);

struct DatasetManifest {
  int num_cells = 0;
  int samples_per_block = 0;  // M
  int access_points = 0;      // K
  int images_per_group = 0;   // S
  int image_size = 0;
  std::uint64_t seed = 0;
  std::string rng;
  std::vector<std::string> ap_ids;
  std::vector<Cell> cells;
  int rssi_groups = 0;
  int photo_groups = 0;
  AssociationMode association = AssociationMode::diagonal;
  int test_points = 0;
  nlohmann::json generator;  // generator config the dataset was built from

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

struct CellData {
  std::vector<RssiBlock> rssi_groups;
  std::vector<ImageGroup> photo_groups;
};

struct Dataset {
  DatasetManifest manifest;
  CellGrid grid;
  std::vector<CellData> cells;  // indexed by label
  std::vector<Sample> test;
};

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
// Throws DatasetError naming the file and line on malformed input.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image);
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& dir);

// Loads everything; `with_test = false` skips the test split.
Dataset load_dataset(const std::filesystem::path& dir, bool with_test = true);

// Structural check of a dataset directory; returns the problems found.
std::vector<std::string> validate_dataset(const std::filesystem::path& dir);

}  // namespace wvfusion
