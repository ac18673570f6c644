#include "affordgen/affordance.hpp"

#include <algorithm>
#include <cmath>

#include "affordgen/errors.hpp"
#include "affordgen/kdtree.hpp"

namespace affordgen::affordance {

void InterpolationParams::validate() const {
  if (k < 1) throw UsageError("interpolation: k must be at least 1");
  if (!(sigma > 0.0)) throw UsageError("interpolation: sigma must be positive");
  if (!(theta > 0.0)) throw UsageError("interpolation: theta must be positive");
}

std::vector<LabeledPoint> labeled_points(const labeler::SparseAffordance& sparse,
                                         std::span<const geom::Vec2> zero_anchors) {
  std::vector<LabeledPoint> out;
  out.reserve(sparse.samples.size() + zero_anchors.size());
  for (const auto& s : sparse.samples) {
    out.push_back({Vec3(s.position.x(), s.position.y(), 0.0), static_cast<double>(s.value)});
  }
  for (const auto& a : zero_anchors) out.push_back({Vec3(a.x(), a.y(), 0.0), 0.0});
  return out;
}

std::vector<double> associate(const labeler::SparseAffordance& sparse, const geom::PointCloud& floor,
                              const geom::RigidTransform& camera_pose, double theta,
                              const geom::RigidTransform& base_from_camera) {
  if (!(theta > 0.0)) {
    throw UsageError("associate: theta must be positive");
  }
  std::vector<double> out(floor.size(), 0.0);
  if (sparse.samples.empty() || floor.empty()) {
    return out;
  }
  const geom::RigidTransform world_to_base = geom::compose(base_from_camera, camera_pose.inverse());

  std::vector<Vec3> sample_positions;
  sample_positions.reserve(sparse.samples.size());
  for (const auto& s : sparse.samples) {
    sample_positions.push_back(world_to_base.apply(Vec3(s.position.x(), s.position.y(), 0.0)));
  }
  const KdTree tree(sample_positions);
  const double theta2 = theta * theta;
  for (std::size_t i = 0; i < floor.size(); ++i) {
    const Neighbor nn = tree.nearest(world_to_base.apply(floor.point(i)));
    if (nn.squared_distance < theta2) {
      out[i] = sparse.samples[nn.index].value;
    }
  }
  return out;
}

double gaussian_weight(double distance, double sigma) {
  if (!(sigma > 0.0)) {
    throw UsageError("gaussian_weight: sigma must be positive");
  }
  return std::exp(-(distance * distance) / (2.0 * sigma * sigma));
}

DenseAffordanceMap interpolate(std::span<const LabeledPoint> samples, const geom::PointCloud& floor, int k,
                               double sigma) {
  if (k < 1) throw UsageError("interpolate: k must be at least 1");
  if (!(sigma > 0.0)) throw UsageError("interpolate: sigma must be positive");

  DenseAffordanceMap map;
  map.params.k = k;
  map.params.sigma = sigma;
  map.values.assign(floor.size(), 0.0);
  if (samples.empty()) {
    return map;
  }

  std::vector<Vec3> positions;
  positions.reserve(samples.size());
  for (const auto& s : samples) positions.push_back(s.position);
  const KdTree tree(positions);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  for (std::size_t i = 0; i < floor.size(); ++i) {
    const auto neighbors = tree.knn(floor.point(i), static_cast<std::size_t>(k));
    // Weights are taken relative to the closest neighbor: the common factor
    // cancels in the ratio and far-away points no longer underflow to 0/0.
    const double d2_min = neighbors.front().squared_distance;
    double lo = samples[neighbors.front().index].value;
    double hi = lo;
    for (const auto& n : neighbors) {
      lo = std::min(lo, samples[n.index].value);
      hi = std::max(hi, samples[n.index].value);
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& n : neighbors) {
      const double w = std::exp(-(n.squared_distance - d2_min) * inv_two_sigma2);
      num += w * (samples[n.index].value - lo);
      den += w;
    }
    map.values[i] = std::clamp(lo + num / den, lo, hi);
  }
  return map;
}

DenseAffordanceMap interpolate(const labeler::SparseAffordance& sparse, const geom::PointCloud& floor,
                               const InterpolationParams& params) {
  params.validate();
  const auto points = labeled_points(sparse);
  DenseAffordanceMap map = interpolate(points, floor, params.k, params.sigma);
  map.params = params;
  return map;
}

}  // namespace affordgen::affordance
