#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affordgen/geom.hpp"
#include "affordgen/scenegen.hpp"

namespace affordgen::labeler {

using geom::Vec2;
using geom::Vec3;

enum class EndEffector { Gripper, Suction };

const char* to_string(EndEffector e);
EndEffector parse_end_effector(const std::string& text);

/// Approach corridor half-width: 0.08 m for grippers, 0.04 m for suction.
double approach_half_width(EndEffector e);

struct RobotSpec {
  std::string name;
  double arm_reach = 0.85;
  double min_reach = 0.15;
  double base_height = 0.30;
  double base_radius = 0.25;
  EndEffector end_effector = EndEffector::Gripper;

  /// Throws UsageError unless 0 <= min_reach < arm_reach and base_radius > 0.
  void validate() const;
  double half_width() const { return approach_half_width(end_effector); }

  bool operator==(const RobotSpec&) const = default;
};

/// panda, xarm6, ur5e, flexiv.
std::vector<RobotSpec> default_robots();
/// Throws UsageError listing the known names when `name` is absent.
const RobotSpec& find_robot(const std::vector<RobotSpec>& robots, const std::string& name);

struct AffordanceSample {
  Vec2 position;
  std::uint8_t value = 0;

  bool operator==(const AffordanceSample&) const = default;
};

struct SparseAffordance {
  std::vector<AffordanceSample> samples;
  RobotSpec robot;
  std::uint32_t target_id = 0;
  double spacing = 0.10;  ///< grid spacing the samples were taken at

  bool operator==(const SparseAffordance&) const = default;
};

struct ViewpointParams {
  int count = 10;
  double lateral_max = 1.5;
  double forward_min = 1.5;
  double forward_max = 3.8;
  int max_retries = 25;
  double camera_height = 1.4;
  geom::CameraIntrinsics intrinsics;
};

struct ViewpointStats {
  std::size_t retries = 0;
  std::size_t dropped = 0;
};

/// True when the target's box center projects into the image and the ray
/// from the camera to it first hits the target.
bool target_visible(const scenegen::Configuration& config, std::uint32_t target_id, const geom::RigidTransform& pose,
                    const geom::CameraIntrinsics& intr);

/// Camera poses around a target. Slot i sits left (even i) or right (odd i)
/// of the approach axis; an invisible draw is redrawn up to max_retries times
/// before the slot is dropped, so fewer than `count` poses may come back.
std::vector<geom::RigidTransform> sample_viewpoints(const scenegen::Configuration& config, std::uint32_t target_id,
                                                    std::uint64_t seed, const ViewpointParams& params = {},
                                                    ViewpointStats* stats = nullptr);

/// Grid points within `reach` of the target projection on the approach side
/// ((p - target) · normal < 0), ordered by row (y) then column (x).
std::vector<Vec2> sample_base_grid(const Vec2& target_floor, const Vec2& normal, double reach, double spacing = 0.10);

/// Geometric stand-in for a manipulation trial. Succeeds iff
///  (a) the base disc overlaps no obstacle or furniture footprint,
///  (b) the shoulder-to-target distance lies in [min_reach, arm_reach], and
///  (c) the base-to-target floor segment, inflated by the approach
///      half-width, clears every obstacle footprint.
bool feasible(const RobotSpec& robot, const Vec2& base, const scenegen::Configuration& config, std::uint32_t target_id);

/// Points of the same lattice within `rows` spacings beyond `reach` that are
/// not trial positions, in grid order: the ring just outside the reach plus
/// everything on or behind the approach face. Neither is in front of the
/// target within reach, so both read as failures.
std::vector<Vec2> guard_ring(const Vec2& target_floor, const Vec2& normal, double reach, double spacing,
                             int rows = 2);

SparseAffordance label_configuration(const RobotSpec& robot, const scenegen::Configuration& config,
                                     std::uint32_t target_id, double spacing = 0.10);

}  // namespace affordgen::labeler
