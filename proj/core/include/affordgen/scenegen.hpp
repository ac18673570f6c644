#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affordgen/geom.hpp"

namespace affordgen::scenegen {

using geom::Vec2;
using geom::Vec3;

enum class AssetCategory { RigidTarget, ArticulatedTarget, Obstacle, Furniture };
enum class Mount { Countertop, Floor };

const char* to_string(AssetCategory category);
const char* to_string(Mount mount);
AssetCategory parse_category(const std::string& text);
Mount parse_mount(const std::string& text);

/// One primitive asset. Footprint is width (along the wall, x) by depth (y).
struct AssetEntry {
  AssetCategory category = AssetCategory::Furniture;
  std::string name;
  double width = 0.0;
  double depth = 0.0;
  double height = 0.0;
  Mount mount = Mount::Floor;

  /// Asset kind: the part of the name before ':' ("counter:80" -> "counter").
  std::string kind() const;

  bool operator==(const AssetEntry&) const = default;
};

struct AssetCatalog {
  std::vector<AssetEntry> entries;

  /// Throws UsageError on non-positive dimensions or an empty category.
  void validate() const;
  std::vector<AssetEntry> of(AssetCategory category) const;

  /// Built-in kitchen catalog of box primitives.
  static AssetCatalog defaults();

  bool operator==(const AssetCatalog&) const = default;
};

struct SceneParams {
  double wall_length = 6.0;
  double counter_height = 0.9;
  double room_margin = 2.0;  ///< free floor past each end of the wall
  double room_depth = 6.0;   ///< distance from the wall to the opposite wall
  double room_height = 2.5;
};

struct FurniturePlacement {
  AssetEntry asset;
  double offset = 0.0;  ///< left edge along the wall, meters

  bool operator==(const FurniturePlacement&) const = default;
};

struct ArticulatedTarget {
  AssetEntry asset;   ///< the furniture item carrying the handle
  Vec3 position;      ///< handle center
  Vec2 normal;        ///< approach direction (robot toward target)

  bool operator==(const ArticulatedTarget&) const = default;
};

/// One furniture layout along a single wall.
///
/// World frame: the wall runs along the x axis at y = 0, furniture occupies
/// y in [-depth, 0], and free floor lies at y < -depth.
struct SceneSpec {
  std::uint64_t scene_id = 0;
  double wall_length = 6.0;
  double counter_height = 0.9;
  std::vector<FurniturePlacement> furniture;
  std::vector<ArticulatedTarget> articulated_targets;
  std::optional<geom::Aabb> room;  ///< interior of the enclosing room; none = open floor

  bool operator==(const SceneSpec&) const = default;
};

/// Four wall slabs enclosing `interior`, all with the background id 0.
std::vector<geom::Solid> room_walls(const geom::Aabb& interior);

/// Box occupied by a furniture placement. Countertop units are cut to the
/// scene's counter height; other furniture keeps its catalog height.
geom::Aabb furniture_box(const SceneSpec& scene, const FurniturePlacement& placement);

enum class TargetKind { Rigid, Articulated };

struct Target {
  std::uint32_t id = 0;
  AssetEntry asset;
  TargetKind kind = TargetKind::Rigid;
  Vec3 position;  ///< rigid: bottom center on the countertop; articulated: handle center
  Vec2 normal;    ///< unit approach direction
  geom::Aabb box;

  Vec2 floor() const { return position.head<2>(); }
  bool operator==(const Target&) const = default;
};

struct Obstacle {
  std::uint32_t id = 0;
  AssetEntry asset;
  Vec2 position;
  double yaw = 0.0;  ///< 0 or pi/2; solids stay axis-aligned
  std::uint32_t near_target = 0;
  geom::Aabb box;

  geom::Rect footprint() const { return geom::Rect::of(box); }
  bool operator==(const Obstacle&) const = default;
};

struct FurnitureSolid {
  std::uint32_t id = 0;
  AssetEntry asset;
  geom::Aabb box;

  geom::Rect footprint() const { return geom::Rect::of(box); }
  bool operator==(const FurnitureSolid&) const = default;
};

/// One arrangement of targets and obstacles in a scene. Self-contained: it
/// carries the furniture solids so rendering and labeling need nothing else.
struct Configuration {
  std::uint64_t config_id = 0;
  std::uint64_t scene_id = 0;
  std::vector<FurnitureSolid> furniture;
  std::vector<Target> targets;
  std::vector<Obstacle> obstacles;
  std::optional<geom::Aabb> room;

  const Target* find_target(std::uint32_t id) const;
  /// Throws DataError for an unknown id.
  const Target& target(std::uint32_t id) const;
  /// Furniture, targets, obstacles, then the room walls (id 0).
  std::vector<geom::Solid> solids() const;
  std::vector<std::uint32_t> object_ids() const;
  std::vector<std::uint32_t> obstacle_ids() const;
  std::vector<geom::Rect> obstacle_footprints() const;
  std::vector<geom::Rect> furniture_footprints() const;

  bool operator==(const Configuration&) const = default;
};

struct PlacementParams {
  double obstacle_radius = 1.2;   ///< semicircle radius for obstacle placement
  int max_attempts = 100;         ///< rejection-sampling budget per object
  int min_rigid = 1;
  int max_rigid = 3;
  int min_obstacles = 1;
  int max_obstacles = 3;
};

struct PlacementStats {
  std::size_t dropped_obstacles = 0;
  std::size_t dropped_targets = 0;
};

/// Shuffles furniture kinds, samples one instance per kind and packs them
/// left to right from offset 0. Throws UsageError when they overflow the wall.
SceneSpec generate_scene(std::uint64_t seed, const AssetCatalog& catalog, const SceneParams& params = {});

/// Configuration `i` uses the stream derive_seed(seed, {i}) and gets config_id i.
std::vector<Configuration> generate_configurations(const SceneSpec& scene, std::uint64_t seed, int count,
                                                   const AssetCatalog& catalog,
                                                   const PlacementParams& params = {},
                                                   PlacementStats* stats = nullptr);

}  // namespace affordgen::scenegen
