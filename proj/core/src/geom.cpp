#include "affordgen/geom.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/SVD>

#include "affordgen/errors.hpp"

namespace affordgen::geom {

namespace {

constexpr double kRotationTolerance = 1e-9;
constexpr double kDriftTolerance = 1e-12;

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

// Slab test; returns the entry parameter when the ray enters the box at t > 0.
std::optional<double> intersect_box(const Aabb& box, const Vec3& origin, const Vec3& dir) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = origin[axis];
    const double d = dir[axis];
    if (d == 0.0) {
      if (o < box.min[axis] || o > box.max[axis]) {
        return std::nullopt;
      }
      continue;
    }
    double t1 = (box.min[axis] - o) / d;
    double t2 = (box.max[axis] - o) / d;
    if (t1 > t2) {
      std::swap(t1, t2);
    }
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) {
      return std::nullopt;
    }
  }
  if (t_near <= 0.0) {
    return std::nullopt;
  }
  return t_near;
}

}  // namespace

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw UsageError("rigid transform has non-finite entries");
  }
  if (orthonormality_error(rotation) > kRotationTolerance ||
      std::abs(rotation.determinant() - 1.0) > kRotationTolerance) {
    throw UsageError("rotation is not orthonormal with determinant +1");
  }
}

RigidTransform RigidTransform::translation(const Vec3& t) { return {Mat3::Identity(), t}; }

RigidTransform RigidTransform::rotation_z(double radians) {
  return from_axis_angle(Vec3::UnitZ(), radians);
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double radians, const Vec3& t) {
  if (axis.norm() == 0.0) {
    throw UsageError("rotation axis must be nonzero");
  }
  const Mat3 r = Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
  return {Unchecked{}, orthonormalize(r), t};
}

RigidTransform RigidTransform::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = target - eye;
  if (forward.norm() == 0.0) {
    throw UsageError("look_at: eye and target coincide");
  }
  const Vec3 z = forward.normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-12) {
    // Looking along `up`: any perpendicular right axis will do.
    x = z.cross(std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return {Unchecked{}, r, eye};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {Unchecked{}, rt, -(rt * translation_)};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Mat3 r = a.rotation_ * b.rotation_;
  if (orthonormality_error(r) > kDriftTolerance) {
    r = orthonormalize(r);
  }
  return {RigidTransform::Unchecked{}, r, a.rotation_ * b.translation_ + a.translation_};
}

double orthonormality_error(const Mat3& rotation) {
  return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
}

CameraIntrinsics CameraIntrinsics::centered(int width, int height, double focal) {
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.fx = focal;
  intr.fy = focal;
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  return intr;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw UsageError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw UsageError("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw UsageError("intrinsics: principal point outside the image");
  }
}

std::optional<Vec2> project_camera(const CameraIntrinsics& intr, const Vec3& p) {
  if (!(p.z() > 0.0)) {
    return std::nullopt;
  }
  return Vec2(intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy);
}

std::optional<Vec2> project(const CameraIntrinsics& intr, const RigidTransform& pose, const Vec3& p_world) {
  const Vec3 p_cam = pose.rotation().transpose() * (p_world - pose.translation());
  return project_camera(intr, p_cam);
}

Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v) {
  return {(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
}

DepthMap::DepthMap(int w, int h)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, no_hit()) {}

float DepthMap::no_hit() { return std::numeric_limits<float>::quiet_NaN(); }

bool DepthMap::operator==(const DepthMap& other) const {
  return width == other.width && height == other.height && values.size() == other.values.size() &&
         std::memcmp(values.data(), other.values.data(), values.size() * sizeof(float)) == 0;
}

bool IdMap::contains(std::uint32_t id) const {
  return std::find(values.begin(), values.end(), id) != values.end();
}

std::optional<std::size_t> PointCloud::channel_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - names_.begin());
}

void PointCloud::reserve(std::size_t n) {
  points_.reserve(n);
  channels_.reserve(n * names_.size());
}

void PointCloud::push_back(const Vec3& p, std::span<const double> channels) {
  if (channels.size() != names_.size()) {
    throw UsageError("point has " + std::to_string(channels.size()) + " channels, cloud expects " +
                     std::to_string(names_.size()));
  }
  points_.push_back(p);
  channels_.insert(channels_.end(), channels.begin(), channels.end());
}

void PointCloud::add_channel(const std::string& name, std::span<const double> values) {
  if (values.size() != points_.size()) {
    throw UsageError("channel '" + name + "' length does not match point count");
  }
  const std::size_t old_c = names_.size();
  std::vector<double> merged;
  merged.reserve(points_.size() * (old_c + 1));
  for (std::size_t i = 0; i < points_.size(); ++i) {
    merged.insert(merged.end(), channels_.begin() + static_cast<std::ptrdiff_t>(i * old_c),
                  channels_.begin() + static_cast<std::ptrdiff_t>((i + 1) * old_c));
    merged.push_back(values[i]);
  }
  channels_ = std::move(merged);
  names_.push_back(name);
}

Rect Rect::centered(const Vec2& center, double width, double depth) {
  const Vec2 half(width / 2.0, depth / 2.0);
  return {center - half, center + half};
}

bool Rect::contains(const Vec2& p) const {
  return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
}

std::optional<RayHit> cast_ray(std::span<const Solid> solids, const Vec3& origin, const Vec3& dir) {
  std::optional<RayHit> best;
  if (dir.z() < 0.0 && origin.z() > 0.0) {
    best = RayHit{-origin.z() / dir.z(), 0};
  }
  for (const Solid& solid : solids) {
    const auto t = intersect_box(solid.box, origin, dir);
    if (t && (!best || *t < best->t)) {
      best = RayHit{*t, solid.id};
    }
  }
  return best;
}

RenderResult render_depth(std::span<const Solid> solids, const RigidTransform& pose, const CameraIntrinsics& intr) {
  intr.validate();
  RenderResult out{DepthMap(intr.width, intr.height), IdMap(intr.width, intr.height)};
  const Vec3& origin = pose.translation();
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir = pose.apply_direction(pixel_ray(intr, u, v));
      if (const auto hit = cast_ray(solids, origin, dir)) {
        out.depth.at(u, v) = static_cast<float>(hit->t);
        out.ids.at(u, v) = hit->id;
      }
    }
  }
  return out;
}

PointCloud backproject(const DepthMap& depth, const IdMap& ids, const CameraIntrinsics& intr,
                       const RigidTransform& pose) {
  if (depth.width != ids.width || depth.height != ids.height) {
    throw UsageError("backproject: depth and id maps differ in size");
  }
  if (depth.width != intr.width || depth.height != intr.height) {
    throw UsageError("backproject: depth map does not match intrinsics");
  }
  PointCloud cloud({kIdChannel});
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const float d = depth.at(u, v);
      if (!std::isfinite(d)) {
        continue;
      }
      const Vec3 p = pose.apply(static_cast<double>(d) * pixel_ray(intr, u, v));
      const double id = ids.at(u, v);
      cloud.push_back(p, std::span<const double>(&id, 1));
    }
  }
  return cloud;
}

namespace {

PointCloud filter_by_height(const PointCloud& cloud, double z_max, bool keep_below) {
  PointCloud out(cloud.channel_names());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if ((cloud.point(i).z() < z_max) == keep_below) {
      out.push_back(cloud.point(i), cloud.channels_of(i));
    }
  }
  return out;
}

}  // namespace

PointCloud extract_floor(const PointCloud& cloud, double z_max) {
  if (!(z_max > 0.0)) {
    throw UsageError("extract_floor: z_max must be positive");
  }
  return filter_by_height(cloud, z_max, true);
}

PointCloud extract_non_floor(const PointCloud& cloud, double z_max) {
  return filter_by_height(cloud, z_max, false);
}

double distance_point_rect(const Vec2& p, const Rect& r) {
  const double dx = std::max({r.min.x() - p.x(), 0.0, p.x() - r.max.x()});
  const double dy = std::max({r.min.y() - p.y(), 0.0, p.y() - r.max.y()});
  return std::hypot(dx, dy);
}

double distance_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) {
    return (p - a).norm();
  }
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

bool segment_intersects_rect(const Vec2& a, const Vec2& b, const Rect& r) {
  // Liang-Barsky clipping of a + s (b - a), s in [0, 1].
  const Vec2 d = b - a;
  double lo = 0.0;
  double hi = 1.0;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < r.min[axis] || a[axis] > r.max[axis]) {
        return false;
      }
      continue;
    }
    double s1 = (r.min[axis] - a[axis]) / d[axis];
    double s2 = (r.max[axis] - a[axis]) / d[axis];
    if (s1 > s2) {
      std::swap(s1, s2);
    }
    lo = std::max(lo, s1);
    hi = std::min(hi, s2);
    if (lo > hi) {
      return false;
    }
  }
  return true;
}

double distance_segment_rect(const Vec2& a, const Vec2& b, const Rect& r) {
  if (segment_intersects_rect(a, b, r)) {
    return 0.0;
  }
  double best = std::min(distance_point_rect(a, r), distance_point_rect(b, r));
  const Vec2 corners[4] = {r.min, {r.max.x(), r.min.y()}, r.max, {r.min.x(), r.max.y()}};
  for (const Vec2& c : corners) {
    best = std::min(best, distance_point_segment(c, a, b));
  }
  return best;
}

bool rects_overlap(const Rect& a, const Rect& b) {
  return a.min.x() < b.max.x() && b.min.x() < a.max.x() && a.min.y() < b.max.y() && b.min.y() < a.max.y();
}

}  // namespace affordgen::geom
