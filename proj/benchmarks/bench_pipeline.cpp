#include <benchmark/benchmark.h>

#include "affordgen/kdtree.hpp"
#include "affordgen/pipeline.hpp"

using namespace affordgen;
namespace pl = affordgen::pipeline;

namespace {

struct Fixture {
  pl::PipelineConfig cfg;
  pl::SceneBundle bundle;
  labeler::RobotSpec robot;
  scenegen::Configuration config;
  datastore::Episode episode;

  Fixture() {
    cfg.views = 1;
    bundle = pl::make_scene(cfg, scenegen::AssetCatalog::defaults(), 0);
    robot = labeler::find_robot(labeler::default_robots(), "panda");
    for (const auto& c : bundle.configs) {
      auto eps = pl::make_episodes(cfg, c, 1, robot, true);
      if (!eps.empty() && eps[0].floor_cloud.size() > 1000) {
        episode = std::move(eps[0]);
        config = c;
        return;
      }
    }
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Render(benchmark::State& state) {
  const auto& f = fixture();
  const auto solids = f.config.solids();
  for (auto _ : state) {
    benchmark::DoNotOptimize(geom::render_depth(solids, f.episode.pose, f.episode.intrinsics));
  }
}
BENCHMARK(BM_Render)->Unit(benchmark::kMillisecond);

void BM_KdTreeKnn(benchmark::State& state) {
  const auto& cloud = fixture().episode.floor_cloud;
  std::vector<geom::Vec3> pts;
  for (std::size_t i = 0; i < cloud.size(); ++i) pts.push_back(cloud.point(i));
  const KdTree tree(pts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.knn(pts[i++ % pts.size()], static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_KdTreeKnn)->Arg(1)->Arg(8)->Arg(32);

void BM_Label(benchmark::State& state) {
  const auto& f = fixture();
  auto e = f.episode;
  for (auto _ : state) {
    pl::label_episode(e, f.config, f.robot, f.cfg.spacing, f.cfg.theta);
  }
}
BENCHMARK(BM_Label)->Unit(benchmark::kMillisecond);

void BM_Interpolate(benchmark::State& state) {
  const auto& f = fixture();
  auto e = f.episode;
  affordance::InterpolationParams params;
  params.k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    pl::interpolate_episode(e, params);
  }
  state.counters["points"] = static_cast<double>(e.floor_cloud.size());
}
BENCHMARK(BM_Interpolate)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
