#include <algorithm>
#include <cmath>
#include <numeric>

#include "affordgen/errors.hpp"
#include "affordgen/eval.hpp"
#include "affordgen/rng.hpp"
#include "doctest.h"
#include "oracles/metrics.hpp"
#include "oracles/planar.hpp"
#include "support/fixtures.hpp"

using namespace affordgen;
using namespace affordgen::eval;
using geom::Vec2;
using geom::Vec3;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, double zero_fraction) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() < zero_fraction ? 0.0 : rng.uniform();
  return v;
}

void check_scores(const Metrics& got, const oracle::Scores& expect) {
  CHECK(got.rmse == doctest::Approx(expect.rmse).epsilon(1e-12));
  CHECK(got.log_mse == doctest::Approx(expect.log_mse).epsilon(1e-12));
  REQUIRE(got.pcc.has_value() == expect.pcc.has_value());
  if (got.pcc) CHECK(*got.pcc == doctest::Approx(*expect.pcc).epsilon(1e-12));
  REQUIRE(got.sim.has_value() == expect.sim.has_value());
  if (got.sim) CHECK(*got.sim == doctest::Approx(*expect.sim).epsilon(1e-12));
}

geom::PointCloud floor_grid(double x0, double x1, double y0, double y1, double step) {
  geom::PointCloud c;
  for (double y = y0; y <= y1 + 1e-9; y += step)
    for (double x = x0; x <= x1 + 1e-9; x += step) c.push_back(Vec3(x, y, 0.0));
  return c;
}

labeler::RobotSpec panda() { return labeler::find_robot(labeler::default_robots(), "panda"); }

}  // namespace

TEST_CASE("metrics example") {
  const std::vector<double> p{0.1, 0.4, 0.7};
  const std::vector<double> g{0.2, 0.2, 0.8};
  const auto m = metrics(p, g);
  CHECK(m.rmse == doctest::Approx(std::sqrt(0.06 / 3)).epsilon(1e-12));
  check_scores(m, oracle::metrics(p, g));
  CHECK(mse(p, g) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("metrics edge cases") {
  const std::vector<double> z{0.0, 0.0};
  const std::vector<double> c{0.5, 0.5};
  const auto m = metrics(z, c);
  CHECK_FALSE(m.pcc);
  CHECK_FALSE(m.sim);
  CHECK(m.rmse == doctest::Approx(0.5));
  CHECK(metrics(c, c).rmse == 0.0);
  CHECK_THROWS_AS(metrics(std::vector<double>{}, std::vector<double>{}), UsageError);
  CHECK_THROWS_AS(metrics(z, std::vector<double>{1.0}), UsageError);
  CHECK_THROWS_AS(metrics(std::vector<double>{-0.1, 0.0}, c), UsageError);
}

TEST_CASE("property: metrics match scalar-loop definitions") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 500));
    const auto p = random_values(rng, n, 0.3);
    const auto g = random_values(rng, n, 0.5);
    check_scores(metrics(p, g), oracle::metrics(p, g));
  }
}

TEST_CASE("property: weighted MSE follows its coin flips and never exceeds MSE") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 400));
    const auto p = random_values(rng, n, 0.2);
    const auto g = random_values(rng, n, 0.6);
    const double lambda = rng.uniform();
    const auto seed = static_cast<std::uint64_t>(trial) * 7919;
    const double w = weighted_mse(p, g, lambda, seed);
    CHECK(w == doctest::Approx(oracle::weighted_mse(p, g, lambda, seed)).epsilon(1e-12));
    CHECK(w <= mse(p, g) + 1e-15);
  }
  const std::vector<double> p{0.3, 0.9};
  const std::vector<double> g{0.3, 0.9};
  CHECK(weighted_mse(p, g, 0.7, 1) == 0.0);
  const double one = weighted_mse(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.3, 5);
  CHECK((one == 1.0 || one == 0.3));
  CHECK_THROWS_AS(weighted_mse(p, g, 1.5, 1), UsageError);
}

TEST_CASE("property: PCC is invariant to positive affine maps of the prediction") {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_values(rng, 200, 0.1);
    const auto g = random_values(rng, 200, 0.4);
    const double a = rng.uniform(0.1, 3.0);
    const double b = rng.uniform(0.0, 2.0);
    std::vector<double> q(p.size());
    std::transform(p.begin(), p.end(), q.begin(), [&](double x) { return a * x + b; });
    CHECK(*metrics(q, g).pcc == doctest::Approx(*metrics(p, g).pcc).epsilon(1e-10));
  }
}

TEST_CASE("accumulator averages per map and per scene, skipping undefined scores") {
  MetricsAccumulator acc;
  acc.add(1, Metrics{0.2, 0.1, 0.5, std::nullopt});
  acc.add(1, Metrics{0.4, 0.3, std::nullopt, 0.8});
  acc.add(2, Metrics{0.6, 0.2, 1.0, 0.6});
  const auto r = acc.report();
  CHECK(r.maps == 3);
  CHECK(r.overall.rmse == doctest::Approx(0.4));
  CHECK(*r.overall.pcc == doctest::Approx(0.75));
  CHECK(*r.overall.sim == doctest::Approx(0.7));
  CHECK(r.per_scene.at(1).rmse == doctest::Approx(0.3));
  CHECK(*r.per_scene.at(1).pcc == 0.5);
  const auto csv = per_scene_csv(r);
  CHECK(csv.rfind("scene_id,rmse,log_mse,pcc,sim\n", 0) == 0);
}

TEST_CASE("top indices: highest first, ties by lower index") {
  const std::vector<double> v{0.2, 0.9, 0.5, 0.9, 0.1};
  CHECK(top_indices(v, 3) == std::vector<std::size_t>{1, 3, 2});
  CHECK(top_indices(v, 10).size() == 5);
}

TEST_CASE("MSR checks the top-ranked points with the trial oracle") {
  const auto config = fixture::counter_with_mug();
  const auto floor = floor_grid(0.0, 2.0, -1.6, -0.7, 0.05);
  const auto robot = panda();
  std::vector<double> pred(floor.size());
  for (std::size_t i = 0; i < floor.size(); ++i) {
    pred[i] = labeler::feasible(robot, floor.point(i).head<2>(), config, 2) ? 1.0 + 1e-3 * i : 1e-3 * i;
  }
  const auto good = msr(pred, floor, robot, config, 2, 5);
  CHECK(good.top1 == 1.0);
  CHECK(good.top_k == 1.0);
  for (double& v : pred) v = 2.0 - v;
  const auto bad = msr(pred, floor, robot, config, 2, 5);
  CHECK(bad.top1 == 0.0);
  CHECK_THROWS_AS(msr(std::vector<double>{}, geom::PointCloud{}, robot, config, 2), UsageError);
  CHECK_THROWS_AS(msr(std::vector<double>{1.0}, floor, robot, config, 2), UsageError);

  const std::vector<MsrReport> parts{{1.0, 0.6, 5, 1}, {0.0, 0.2, 5, 3}};
  const auto all = aggregate(parts);
  CHECK(all.trials == 4);
  CHECK(all.top1 == doctest::Approx(0.25));
  CHECK(all.top_k == doctest::Approx(0.3));
}

TEST_CASE("property: MSR is invariant to strictly increasing transforms of the map") {
  const auto config = fixture::counter_with_mug();
  const auto floor = floor_grid(0.0, 2.0, -1.6, -0.7, 0.05);
  const auto robot = panda();
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pred(floor.size());
    for (auto& v : pred) v = rng.uniform();
    std::vector<double> warped(pred.size());
    std::transform(pred.begin(), pred.end(), warped.begin(), [](double x) { return std::exp(3 * x) + x * x * x; });
    const auto a = msr(pred, floor, robot, config, 2, 5);
    const auto b = msr(warped, floor, robot, config, 2, 5);
    CHECK(a.top1 == b.top1);
    CHECK(a.top_k == b.top_k);
  }
}

TEST_CASE("MSR on a scene with no feasible base is zero for any map") {
  auto config = fixture::counter_with_mug();
  config.obstacles.push_back(fixture::obstacle(3, Vec2(1.0, -2.0), 4.0, 2.7, 0.3));
  const auto floor = floor_grid(0.0, 2.0, -1.6, -0.7, 0.05);
  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> pred(floor.size());
    for (auto& v : pred) v = rng.uniform();
    const auto r = msr(pred, floor, panda(), config, 2, 5);
    CHECK(r.top1 == 0.0);
    CHECK(r.top_k == 0.0);
  }
}

TEST_CASE("random predictor: uniform inside the region, zero outside") {
  const auto floor = floor_grid(-2.0, 2.0, -2.0, 2.0, 0.02);
  const OperationalRegion region{Vec2(0, 0), Vec2(0, 1), 0.85};
  const auto map = predict_random(floor, region, 99);
  double sum = 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < floor.size(); ++i) {
    const Vec2 p = floor.point(i).head<2>();
    const bool in = p.norm() <= 0.85 && p.y() < 0.0;
    CHECK(region.contains(p) == in);
    if (!in) {
      CHECK(map.values[i] == 0.0);
      continue;
    }
    CHECK(map.values[i] >= 0.0);
    CHECK(map.values[i] < 1.0);
    sum += map.values[i];
    ++inside;
  }
  REQUIRE(inside > 1000);
  CHECK(std::abs(sum / inside - 0.5) < 0.05);
  CHECK(predict_random(floor, region, 99) == map);
}

TEST_CASE("heuristic predictor matches a brute-force recomputation") {
  datastore::Episode e;
  e.target_id = 2;
  e.target_position = Vec3(1.0, -0.5, 0.9);
  e.robot = panda();
  e.global_cloud = geom::PointCloud({"id"});
  // a target point, a counter face and the corners of one obstacle
  e.global_cloud.push_back(Vec3(1.0, -0.5, 0.95), std::vector<double>{2});
  e.global_cloud.push_back(Vec3(0.2, -0.6, 0.5), std::vector<double>{1});
  e.global_cloud.push_back(Vec3(1.8, -0.6, 0.5), std::vector<double>{1});
  e.global_cloud.push_back(Vec3(0.6, -1.3, 0.3), std::vector<double>{3});
  e.global_cloud.push_back(Vec3(0.9, -1.0, 0.3), std::vector<double>{3});
  e.global_cloud.push_back(Vec3(1.5, -3.0, 0.0), std::vector<double>{0});
  e.floor_cloud = floor_grid(0.0, 2.0, -1.8, -0.62, 0.03);

  const auto map = predict_heuristic(e);
  REQUIRE(map.values.size() == e.floor_cloud.size());

  const std::vector<geom::Rect> rects{{Vec2(0.2, -0.6), Vec2(1.8, -0.6)}, {Vec2(0.6, -1.3), Vec2(0.9, -1.0)}};
  std::vector<double> expect(e.floor_cloud.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const Vec3 q = e.floor_cloud.point(i);
    const double reach = std::sqrt(std::pow(q.x() - 1.0, 2) + std::pow(q.y() + 0.5, 2) + std::pow(0.3 - 0.9, 2));
    double band = 1.0;
    if (reach < 0.15) band = std::max(0.0, 1.0 - (0.15 - reach) / 0.1);
    if (reach > 0.85) band = std::max(0.0, 1.0 - (reach - 0.85) / 0.1);
    double gap = 0.25;
    for (const auto& r : rects) gap = std::min(gap, oracle::point_rect(q.head<2>(), r));
    expect[i] = band * gap / 0.25;
  }
  const double peak = *std::max_element(expect.begin(), expect.end());
  REQUIRE(peak > 0.0);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(map.values[i] == doctest::Approx(expect[i] / peak).epsilon(1e-12));
    const Vec2 q = e.floor_cloud.point(i).head<2>();
    if (oracle::inside_closed(q, rects[1])) CHECK(map.values[i] == 0.0);
  }
  CHECK(*std::max_element(map.values.begin(), map.values.end()) == 1.0);
}
