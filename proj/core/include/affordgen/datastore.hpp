#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affordgen/affordance.hpp"
#include "affordgen/geom.hpp"
#include "affordgen/labeler.hpp"
#include "affordgen/scenegen.hpp"

namespace affordgen::datastore {

namespace fs = std::filesystem;

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr char kMagic[4] = {'M', 'M', 'K', 'A'};

enum class ElementType : std::uint32_t { Float32 = 1, UInt32 = 2 };

/// In-memory image of one binary array file.
struct ArrayFile {
  ElementType type = ElementType::Float32;
  std::vector<std::uint64_t> dims;
  std::vector<float> f32;
  std::vector<std::uint32_t> u32;

  std::uint64_t element_count() const;
};

/// Header: magic "MMKA", u32 version, u32 element type, u32 rank, u64 dims,
/// then the little-endian payload.
std::vector<std::uint8_t> encode_array(const ArrayFile& array);
/// Throws FormatError naming `source` and the failing byte offset.
ArrayFile decode_array(std::span<const std::uint8_t> bytes, const std::string& source);

void write_array(const fs::path& path, const ArrayFile& array);
ArrayFile read_array(const fs::path& path);

inline constexpr const char* kTargetChannel = "target";
inline constexpr const char* kObstacleChannel = "obstacle";
inline constexpr const char* kLabelChannel = "label";

/// Appends "target" (1 on target points) and "obstacle" (-1 on obstacle
/// points) channels. Throws UsageError if the cloud has no "id" channel.
geom::PointCloud attach_feature_channels(const geom::PointCloud& cloud, std::uint32_t target_id,
                                         std::span<const std::uint32_t> obstacle_ids);

/// One camera view of one target in one configuration.
struct Episode {
  std::uint64_t episode_id = 0;
  std::uint64_t config_id = 0;
  std::uint64_t scene_id = 0;
  std::uint32_t target_id = 0;
  geom::Vec3 target_position = geom::Vec3::Zero();
  geom::Vec2 approach_normal = geom::Vec2::UnitY();
  geom::RigidTransform pose;
  geom::CameraIntrinsics intrinsics;
  geom::DepthMap depth;
  geom::IdMap ids;
  geom::PointCloud global_cloud;
  geom::PointCloud floor_cloud;
  labeler::RobotSpec robot;
  std::optional<labeler::SparseAffordance> sparse;
  std::optional<affordance::DenseAffordanceMap> dense;

  bool operator==(const Episode&) const = default;
};

/// Nearest float32 value. Done per component: GCC at -O3 folds Eigen's
/// cast<float>().cast<double>() back into a no-op.
inline double as_float32(double v) {
  volatile float f = static_cast<float>(v);
  return static_cast<double>(f);
}
template <int N>
Eigen::Matrix<double, N, 1> as_float32(const Eigen::Matrix<double, N, 1>& v) {
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = as_float32(v[i]);
  return out;
}

/// Rounds every stored quantity to its on-disk float32 value so that an
/// episode compares equal to its own write/read round trip.
void quantize(Episode& episode);
geom::PointCloud quantized(const geom::PointCloud& cloud);

/// Writes depth.bin, ids.bin, cloud.bin, floor.bin, meta.json and, when
/// present, sparse.bin and dense.bin.
void write_episode(const Episode& episode, const fs::path& dir);
Episode read_episode(const fs::path& dir);

enum class Split { Train, Test };
const char* to_string(Split split);
Split parse_split(const std::string& text);

struct ConfigEntry {
  std::uint64_t config_id = 0;
  std::vector<std::uint64_t> episode_ids;
  bool operator==(const ConfigEntry&) const = default;
};

struct SceneEntry {
  std::uint64_t scene_id = 0;
  Split split = Split::Train;
  std::vector<ConfigEntry> configs;
  bool operator==(const SceneEntry&) const = default;
};

struct DatasetManifest {
  std::uint32_t version = kFormatVersion;
  std::uint64_t seed = 0;
  std::vector<SceneEntry> scenes;
  std::map<std::string, std::string> params;  ///< generator settings, informational

  bool operator==(const DatasetManifest&) const = default;
};

fs::path scene_dir(const fs::path& root, std::uint64_t scene_id);
fs::path config_dir(const fs::path& root, std::uint64_t scene_id, std::uint64_t config_id);
fs::path episode_dir(const fs::path& root, std::uint64_t scene_id, std::uint64_t config_id, std::uint64_t episode_id);

void write_manifest(const DatasetManifest& manifest, const fs::path& root);
DatasetManifest read_manifest(const fs::path& root);

/// Shuffles scenes by seed; round(train_fraction · n) scenes (kept within
/// [1, n-1]) go to train, the rest to test.
DatasetManifest split_dataset(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed);

struct SplitCounts {
  std::size_t scenes = 0;
  std::size_t configurations = 0;
  std::size_t episodes = 0;
  bool operator==(const SplitCounts&) const = default;
};

struct DatasetStats {
  SplitCounts train;
  SplitCounts test;
  SplitCounts total;
};

/// Counts from the manifest alone.
DatasetStats count(const DatasetManifest& manifest);
/// Counts from the manifest, cross-checked against the directory tree under
/// `root`. Throws DataError listing every missing or unexpected directory.
DatasetStats stats(const DatasetManifest& manifest, const fs::path& root);

// JSON documents (sorted keys, shortest round-trip floats).

std::string to_json(const scenegen::AssetCatalog& catalog);
scenegen::AssetCatalog catalog_from_json(const std::string& text);
scenegen::AssetCatalog load_catalog(const fs::path& path);

std::string to_json(const std::vector<labeler::RobotSpec>& robots);
std::vector<labeler::RobotSpec> robots_from_json(const std::string& text);
std::vector<labeler::RobotSpec> load_robots(const fs::path& path);

std::string to_json(const scenegen::SceneSpec& scene);
scenegen::SceneSpec scene_from_json(const std::string& text);

std::string to_json(const scenegen::Configuration& config);
scenegen::Configuration configuration_from_json(const std::string& text);

void write_configuration(const scenegen::Configuration& config, const fs::path& dir);
scenegen::Configuration read_configuration(const fs::path& dir);
void write_scene(const scenegen::SceneSpec& scene, const fs::path& dir);
scenegen::SceneSpec read_scene(const fs::path& dir);

std::string read_text(const fs::path& path);
/// Throws IoError on any failure.
void write_text(const fs::path& path, const std::string& text);

}  // namespace affordgen::datastore
