#pragma once

#include <span>
#include <vector>

#include "affordgen/geom.hpp"
#include "affordgen/labeler.hpp"

namespace affordgen::affordance {

using geom::Vec3;

/// A trial outcome lifted onto the floor plane.
struct LabeledPoint {
  Vec3 position;
  double value = 0.0;
};

struct InterpolationParams {
  int k = 8;
  double sigma = 0.10;
  double theta = 0.05;

  /// Throws UsageError on k < 1 or non-positive sigma/theta.
  void validate() const;
  bool operator==(const InterpolationParams&) const = default;
};

/// Dense map index-aligned with a floor cloud; all values in [0, 1].
struct DenseAffordanceMap {
  std::vector<double> values;
  InterpolationParams params;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const DenseAffordanceMap&) const = default;
};

/// Samples placed at z = 0, in sample order, followed by a zero-valued point
/// at every entry of `zero_anchors`.
std::vector<LabeledPoint> labeled_points(const labeler::SparseAffordance& sparse,
                                         std::span<const geom::Vec2> zero_anchors = {});

/// Threshold association of trial outcomes with floor points.
///
/// Sample positions go world -> camera (inverse of `camera_pose`) -> base
/// (`base_from_camera`); floor points take the same chain, so both sets are
/// compared in one episode frame. Each floor point receives the value of its
/// nearest sample when that sample is closer than `theta`, else 0. Ties go to
/// the lower sample index.
std::vector<double> associate(const labeler::SparseAffordance& sparse, const geom::PointCloud& floor,
                              const geom::RigidTransform& camera_pose, double theta,
                              const geom::RigidTransform& base_from_camera = geom::RigidTransform::identity());

/// exp(-d² / (2σ²)); throws UsageError for sigma <= 0.
double gaussian_weight(double distance, double sigma);

/// Gaussian-weighted mean of the k nearest samples for every floor point.
/// Uses every sample when fewer than k exist; no samples gives an all-zero map.
DenseAffordanceMap interpolate(std::span<const LabeledPoint> samples, const geom::PointCloud& floor, int k,
                               double sigma);

DenseAffordanceMap interpolate(const labeler::SparseAffordance& sparse, const geom::PointCloud& floor,
                               const InterpolationParams& params = {});

}  // namespace affordgen::affordance
