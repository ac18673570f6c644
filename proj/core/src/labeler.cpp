#include "affordgen/labeler.hpp"

#include <algorithm>
#include <cmath>

#include "affordgen/errors.hpp"
#include "affordgen/rng.hpp"

namespace affordgen::labeler {

namespace {

constexpr double kGridTolerance = 1e-9;

bool inside(const geom::Aabb& box, const Vec3& p) {
  return (p.array() > box.min.array()).all() && (p.array() < box.max.array()).all();
}

}  // namespace

const char* to_string(EndEffector e) { return e == EndEffector::Gripper ? "gripper" : "suction"; }

EndEffector parse_end_effector(const std::string& text) {
  if (text == "gripper") return EndEffector::Gripper;
  if (text == "suction") return EndEffector::Suction;
  throw UsageError("unknown end effector '" + text + "'");
}

double approach_half_width(EndEffector e) { return e == EndEffector::Gripper ? 0.08 : 0.04; }

void RobotSpec::validate() const {
  if (!(min_reach >= 0.0) || !(min_reach < arm_reach)) {
    throw UsageError("robot '" + name + "': need 0 <= min_reach < arm_reach");
  }
  if (!(base_radius > 0.0)) {
    throw UsageError("robot '" + name + "': base_radius must be positive");
  }
  if (!(base_height >= 0.0)) {
    throw UsageError("robot '" + name + "': base_height must be non-negative");
  }
}

std::vector<RobotSpec> default_robots() {
  return {
      {"panda", 0.85, 0.15, 0.30, 0.25, EndEffector::Gripper},
      {"xarm6", 0.70, 0.15, 0.45, 0.25, EndEffector::Gripper},
      {"ur5e", 0.85, 0.15, 0.30, 0.25, EndEffector::Suction},
      {"flexiv", 0.80, 0.15, 0.30, 0.25, EndEffector::Gripper},
  };
}

const RobotSpec& find_robot(const std::vector<RobotSpec>& robots, const std::string& name) {
  const auto it = std::find_if(robots.begin(), robots.end(), [&](const RobotSpec& r) { return r.name == name; });
  if (it != robots.end()) {
    return *it;
  }
  std::string known;
  for (const auto& r : robots) {
    known += (known.empty() ? "" : ", ") + r.name;
  }
  throw UsageError("unknown robot '" + name + "' (known: " + known + ")");
}

bool target_visible(const scenegen::Configuration& config, std::uint32_t target_id, const geom::RigidTransform& pose,
                    const geom::CameraIntrinsics& intr) {
  const auto& target = config.target(target_id);
  const Vec3 aim = target.box.center();
  const auto pixel = geom::project(intr, pose, aim);
  if (!pixel || pixel->x() < -0.5 || pixel->y() < -0.5 || pixel->x() >= intr.width - 0.5 ||
      pixel->y() >= intr.height - 0.5) {
    return false;
  }
  const auto solids = config.solids();
  const auto hit = geom::cast_ray(solids, pose.translation(), aim - pose.translation());
  return hit && hit->id == target_id;
}

std::vector<geom::RigidTransform> sample_viewpoints(const scenegen::Configuration& config, std::uint32_t target_id,
                                                    std::uint64_t seed, const ViewpointParams& params,
                                                    ViewpointStats* stats) {
  const auto& target = config.target(target_id);
  const auto solids = config.solids();
  const Vec2 back = -target.normal;
  const Vec2 left(-target.normal.y(), target.normal.x());
  const Vec3 aim = target.box.center();

  std::vector<geom::RigidTransform> poses;
  for (int slot = 0; slot < params.count; ++slot) {
    Rng rng(derive_seed(seed, {target_id, static_cast<std::uint64_t>(slot)}));
    const double side = slot % 2 == 0 ? 1.0 : -1.0;
    bool recorded = false;
    for (int attempt = 0; attempt <= params.max_retries && !recorded; ++attempt) {
      if (attempt > 0 && stats) ++stats->retries;
      const double lateral = rng.uniform(0.0, params.lateral_max);
      const double forward = rng.uniform(params.forward_min, params.forward_max);
      const Vec2 xy = target.floor() + forward * back + side * lateral * left;
      const Vec3 eye(xy.x(), xy.y(), params.camera_height);
      if (std::any_of(solids.begin(), solids.end(), [&](const geom::Solid& s) { return inside(s.box, eye); })) {
        continue;
      }
      const auto pose = geom::RigidTransform::look_at(eye, aim);
      if (target_visible(config, target_id, pose, params.intrinsics)) {
        poses.push_back(pose);
        recorded = true;
      }
    }
    if (!recorded && stats) ++stats->dropped;
  }
  return poses;
}

std::vector<Vec2> sample_base_grid(const Vec2& target_floor, const Vec2& normal, double reach, double spacing) {
  if (!(reach > 0.0) || !(spacing > 0.0)) {
    throw UsageError("sample_base_grid: reach and spacing must be positive");
  }
  const Vec2 n = normal.normalized();
  const auto steps = static_cast<int>(std::ceil(reach / spacing));
  std::vector<Vec2> out;
  for (int j = -steps; j <= steps; ++j) {
    for (int i = -steps; i <= steps; ++i) {
      const Vec2 offset(i * spacing, j * spacing);
      if (offset.squaredNorm() > reach * reach + kGridTolerance) continue;
      if (!(offset.dot(n) < -kGridTolerance)) continue;
      out.push_back(target_floor + offset);
    }
  }
  return out;
}

std::vector<Vec2> guard_ring(const Vec2& target_floor, const Vec2& normal, double reach, double spacing, int rows) {
  if (rows < 1) return {};
  if (!(reach > 0.0) || !(spacing > 0.0)) {
    throw UsageError("guard_ring: reach and spacing must be positive");
  }
  const Vec2 n = normal.normalized();
  const double outer = reach + rows * spacing;
  const auto steps = static_cast<int>(std::ceil(outer / spacing));
  std::vector<Vec2> out;
  for (int j = -steps; j <= steps; ++j) {
    for (int i = -steps; i <= steps; ++i) {
      const Vec2 offset(i * spacing, j * spacing);
      const double d2 = offset.squaredNorm();
      if (d2 > outer * outer + kGridTolerance) continue;
      const bool trial = d2 <= reach * reach + kGridTolerance && offset.dot(n) < -kGridTolerance;
      if (!trial) out.push_back(target_floor + offset);
    }
  }
  return out;
}

bool feasible(const RobotSpec& robot, const Vec2& base, const scenegen::Configuration& config, std::uint32_t target_id) {
  const auto& target = config.target(target_id);

  for (const auto& f : config.furniture) {
    if (geom::distance_point_rect(base, f.footprint()) < robot.base_radius) return false;
  }
  for (const auto& o : config.obstacles) {
    if (geom::distance_point_rect(base, o.footprint()) < robot.base_radius) return false;
  }

  const double reach = (Vec3(base.x(), base.y(), robot.base_height) - target.position).norm();
  if (reach < robot.min_reach || reach > robot.arm_reach) return false;

  const double half_width = robot.half_width();
  for (const auto& o : config.obstacles) {
    if (geom::distance_segment_rect(base, target.floor(), o.footprint()) < half_width) return false;
  }
  return true;
}

SparseAffordance label_configuration(const RobotSpec& robot, const scenegen::Configuration& config,
                                     std::uint32_t target_id, double spacing) {
  robot.validate();
  const auto& target = config.target(target_id);
  SparseAffordance out;
  out.robot = robot;
  out.target_id = target_id;
  out.spacing = spacing;
  for (const Vec2& p : sample_base_grid(target.floor(), target.normal, robot.arm_reach, spacing)) {
    out.samples.push_back({p, static_cast<std::uint8_t>(feasible(robot, p, config, target_id) ? 1 : 0)});
  }
  return out;
}

}  // namespace affordgen::labeler
