#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "affordgen/kdtree.hpp"
#include "affordgen/rng.hpp"
#include "doctest.h"

using namespace affordgen;
using geom::Vec3;

TEST_CASE("rng: same seed, same stream") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: uniform stays in range and uniform_int covers its bounds") {
  Rng rng(1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto k = rng.uniform_int(-2, 2);
    CHECK(k >= -2);
    CHECK(k <= 2);
    seen.insert(k);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("rng: shuffle is a seeded permutation") {
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  auto a = v;
  auto b = v;
  Rng(9).shuffle(a);
  Rng(9).shuffle(b);
  CHECK(a == b);
  CHECK(a != v);
  std::sort(a.begin(), a.end());
  CHECK(a == v);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, {0}) != derive_seed(1, {1}));
  CHECK(derive_seed(1, {0, 1}) != derive_seed(1, {1, 0}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(derive_seed(5, {3, 4}) == derive_seed(5, {3, 4}));
}

TEST_CASE("property: kd-tree knn equals a sorted full scan") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int round = 0; round < 30; ++round) {
    std::vector<Vec3> pts;
    const int n = 1 + static_cast<int>(gen() % 300);
    for (int i = 0; i < n; ++i) {
      // coarse lattice coordinates make exact distance ties common
      pts.emplace_back(std::round(u(gen) * 5) / 5, std::round(u(gen) * 5) / 5, 0.0);
    }
    const KdTree tree(pts, 1 + gen() % 8);
    for (int q = 0; q < 50; ++q) {
      const Vec3 query(u(gen), u(gen), u(gen) * 0.1);
      const std::size_t k = 1 + gen() % 12;
      std::vector<std::size_t> order(pts.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = (pts[a] - query).squaredNorm();
        const double db = (pts[b] - query).squaredNorm();
        return da < db || (da == db && a < b);
      });
      const auto got = tree.knn(query, k);
      REQUIRE(got.size() == std::min(k, pts.size()));
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].index == order[i]);
      CHECK(tree.nearest(query).index == order[0]);
    }
  }
}

TEST_CASE("kd-tree: k larger than the set returns everything") {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}};
  const KdTree tree(pts);
  CHECK(tree.knn({0.9, 0, 0}, 5).size() == 2);
  CHECK(tree.knn({0.9, 0, 0}, 5).front().index == 1);
}
