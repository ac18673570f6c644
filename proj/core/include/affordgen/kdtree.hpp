#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "affordgen/geom.hpp"

namespace affordgen {

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

/// Static 3-d tree over a fixed point set.
///
/// Queries order neighbors by (squared distance, index), so exact ties always
/// resolve to the lower point index regardless of tree shape.
class KdTree {
public:
  KdTree() = default;
  explicit KdTree(std::span<const geom::Vec3> points, std::size_t leaf_size = 8);

  std::size_t size() const noexcept { return points_.size(); }

  /// Up to k nearest points, closest first.
  std::vector<Neighbor> knn(const geom::Vec3& query, std::size_t k) const;
  /// Nearest point; undefined on an empty tree.
  Neighbor nearest(const geom::Vec3& query) const;

private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end, std::size_t leaf_size);
  void search(std::size_t node, const geom::Vec3& query, std::size_t k, std::vector<Neighbor>& heap) const;

  std::vector<geom::Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace affordgen
