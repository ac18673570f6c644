#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace affordgen::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Proper rigid motion x -> R x + t.
class RigidTransform {
public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws UsageError unless `rotation` is orthonormal with det +1 (tolerance 1e-9).
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& t);
  static RigidTransform rotation_z(double radians);
  static RigidTransform from_axis_angle(const Vec3& axis, double radians, const Vec3& t = Vec3::Zero());

  /// Camera-to-world pose for a camera at `eye` looking at `target`.
  /// Camera axes follow the pinhole convention: x right, y down, z forward.
  static RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  RigidTransform inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }
  Mat4 matrix() const;

  bool operator==(const RigidTransform&) const = default;

private:
  struct Unchecked {};
  RigidTransform(Unchecked, const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  friend RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

  Mat3 rotation_;
  Vec3 translation_;
};

/// a ∘ b: applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

/// Largest absolute entry of RᵀR − I.
double orthonormality_error(const Mat3& rotation);

struct CameraIntrinsics {
  double fx = 120.0;
  double fy = 120.0;
  double cx = 80.0;
  double cy = 60.0;
  int width = 160;
  int height = 120;

  /// Principal point at the image center.
  static CameraIntrinsics centered(int width, int height, double focal);

  /// Throws UsageError on non-positive focal lengths, sizes or an
  /// out-of-image principal point.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Pixel coordinates of a camera-frame point; pixel (u, v) has its center at
/// integer coordinates. Empty when the point is not in front of the camera.
std::optional<Vec2> project_camera(const CameraIntrinsics& intr, const Vec3& p_camera);

/// Same as project_camera for a world-frame point and camera-to-world pose.
std::optional<Vec2> project(const CameraIntrinsics& intr, const RigidTransform& pose, const Vec3& p_world);

/// Camera-frame ray direction through a pixel center, scaled so that z = 1.
Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v);

/// Z-depth image. Non-finite entries mark pixels with no hit.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  DepthMap() = default;
  DepthMap(int w, int h);

  float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  static float no_hit();

  /// Bitwise comparison, so no-hit entries compare equal.
  bool operator==(const DepthMap& other) const;
};

/// Per-pixel instance ids; 0 is floor or background.
struct IdMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> values;

  IdMap() = default;
  IdMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0) {}

  std::uint32_t at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  std::uint32_t& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  bool contains(std::uint32_t id) const;

  bool operator==(const IdMap&) const = default;
};

/// World-frame points with an optional set of named per-point channels.
class PointCloud {
public:
  PointCloud() = default;
  explicit PointCloud(std::vector<std::string> channel_names) : names_(std::move(channel_names)) {}

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t channel_count() const noexcept { return names_.size(); }
  const std::vector<std::string>& channel_names() const noexcept { return names_; }
  std::optional<std::size_t> channel_index(const std::string& name) const;

  const std::vector<Vec3>& points() const noexcept { return points_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }
  double channel(std::size_t i, std::size_t c) const { return channels_[i * names_.size() + c]; }
  std::span<const double> channels_of(std::size_t i) const {
    return {channels_.data() + i * names_.size(), names_.size()};
  }
  const std::vector<double>& channel_data() const noexcept { return channels_; }

  void reserve(std::size_t n);
  /// Throws UsageError if `channels.size()` differs from channel_count().
  void push_back(const Vec3& p, std::span<const double> channels = {});
  /// Appends a channel; `values.size()` must equal size().
  void add_channel(const std::string& name, std::span<const double> values);

  bool operator==(const PointCloud&) const = default;

private:
  std::vector<Vec3> points_;
  std::vector<std::string> names_;
  std::vector<double> channels_;
};

inline constexpr const char* kIdChannel = "id";

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 center() const { return 0.5 * (min + max); }
  bool operator==(const Aabb&) const = default;
};

/// Axis-aligned floor footprint.
struct Rect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  static Rect of(const Aabb& box) { return {box.min.head<2>(), box.max.head<2>()}; }
  static Rect centered(const Vec2& center, double width, double depth);
  Vec2 center() const { return 0.5 * (min + max); }
  bool contains(const Vec2& p) const;
  bool operator==(const Rect&) const = default;
};

/// Box solid carrying the instance id it renders as.
struct Solid {
  std::uint32_t id = 0;
  Aabb box;
};

struct RayHit {
  double t = 0.0;  ///< ray parameter; equals z-depth for pixel_ray directions
  std::uint32_t id = 0;
};

/// Nearest intersection of origin + t·dir (t > 0) with the floor plane z = 0
/// and every solid. Solids win only when strictly nearer than the floor.
std::optional<RayHit> cast_ray(std::span<const Solid> solids, const Vec3& origin, const Vec3& dir);

struct RenderResult {
  DepthMap depth;
  IdMap ids;
};

RenderResult render_depth(std::span<const Solid> solids, const RigidTransform& pose, const CameraIntrinsics& intr);

/// One world point per finite depth pixel, row-major pixel order, with the
/// instance id in channel "id".
PointCloud backproject(const DepthMap& depth, const IdMap& ids, const CameraIntrinsics& intr,
                       const RigidTransform& pose);

/// Points with z < z_max, order and channels preserved.
PointCloud extract_floor(const PointCloud& cloud, double z_max = 0.02);

/// Points with z >= z_max; complement of extract_floor.
PointCloud extract_non_floor(const PointCloud& cloud, double z_max = 0.02);

// Planar helpers used by placement and feasibility checks.

double distance_point_rect(const Vec2& p, const Rect& r);
double distance_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);
bool segment_intersects_rect(const Vec2& a, const Vec2& b, const Rect& r);
double distance_segment_rect(const Vec2& a, const Vec2& b, const Rect& r);
/// Open-interior overlap: rectangles that only touch along an edge do not overlap.
bool rects_overlap(const Rect& a, const Rect& b);

}  // namespace affordgen::geom
