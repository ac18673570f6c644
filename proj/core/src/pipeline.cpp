#include "affordgen/pipeline.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "affordgen/errors.hpp"
#include "affordgen/rng.hpp"
#include "json.hpp"

namespace affordgen::pipeline {

using nlohmann::json;

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first error.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

class Logger {
public:
  explicit Logger(const LogSink& sink) : sink_(sink) {}

  void operator()(const json& line) {
    if (!sink_) return;
    std::lock_guard lock(mutex_);
    sink_(line.dump());
  }

private:
  const LogSink& sink_;
  std::mutex mutex_;
};

geom::PointCloud without_channel(const geom::PointCloud& cloud, const std::string& name) {
  const auto drop = cloud.channel_index(name);
  if (!drop) return cloud;
  std::vector<std::string> names = cloud.channel_names();
  names.erase(names.begin() + static_cast<std::ptrdiff_t>(*drop));
  geom::PointCloud out(names);
  out.reserve(cloud.size());
  std::vector<double> channels;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto src = cloud.channels_of(i);
    channels.assign(src.begin(), src.end());
    channels.erase(channels.begin() + static_cast<std::ptrdiff_t>(*drop));
    out.push_back(cloud.point(i), channels);
  }
  return out;
}

datastore::DatasetManifest require_manifest(const fs::path& dataset) { return datastore::read_manifest(dataset); }

fs::path episode_path(const fs::path& root, const EpisodeRef& ref) {
  return datastore::episode_dir(root, ref.scene_id, ref.config_id, ref.episode_id);
}

std::vector<double> read_prediction(const fs::path& dir) {
  const fs::path path = dir / "dense.bin";
  const auto array = datastore::read_array(path);
  if (array.type != datastore::ElementType::Float32 || array.dims.size() != 1) {
    throw FormatError(FormatError::Kind::Shape, path.string(), 8, "expected a float32 vector");
  }
  return {array.f32.begin(), array.f32.end()};
}

}  // namespace

void PipelineConfig::validate() const {
  if (scenes < 1) throw UsageError("--scenes must be at least 1");
  if (configs_per_scene < 1) throw UsageError("--configs-per-scene must be at least 1");
  if (views < 1) throw UsageError("--views must be at least 1");
  interpolation().validate();
  if (!(spacing > 0.0)) throw UsageError("--spacing must be positive");
  if (!(z_max > 0.0)) throw UsageError("--zmax must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw UsageError("--lambda must lie in (0, 1)");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("--train-fraction must lie in (0, 1)");
  if (jobs < 0) throw UsageError("--jobs must be non-negative");
  viewpoints.intrinsics.validate();
}

int PipelineConfig::effective_jobs() const {
  if (jobs > 0) return jobs;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

scenegen::AssetCatalog resolve_catalog(const PipelineConfig& cfg) {
  return cfg.catalog_path ? datastore::load_catalog(*cfg.catalog_path) : scenegen::AssetCatalog::defaults();
}

std::vector<labeler::RobotSpec> resolve_robots(const PipelineConfig& cfg) {
  return cfg.robots_path ? datastore::load_robots(*cfg.robots_path) : labeler::default_robots();
}

std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t scene_index) { return derive_seed(seed, {1, scene_index}); }
std::uint64_t config_seed(std::uint64_t seed, std::uint64_t scene_index) { return derive_seed(seed, {2, scene_index}); }
std::uint64_t view_seed(std::uint64_t seed, std::uint64_t scene_index, std::uint64_t config_id) {
  return derive_seed(seed, {3, scene_index, config_id});
}

SceneBundle make_scene(const PipelineConfig& cfg, const scenegen::AssetCatalog& catalog, std::uint64_t scene_index) {
  SceneBundle bundle;
  bundle.scene = scenegen::generate_scene(scene_seed(cfg.seed, scene_index), catalog, cfg.scene);
  bundle.scene.scene_id = scene_index;
  bundle.configs = scenegen::generate_configurations(bundle.scene, config_seed(cfg.seed, scene_index),
                                                     cfg.configs_per_scene, catalog, {}, &bundle.placement);
  return bundle;
}

void label_episode(datastore::Episode& episode, const scenegen::Configuration& config, const labeler::RobotSpec& robot,
                   double spacing, double theta) {
  auto sparse = labeler::label_configuration(robot, config, episode.target_id, spacing);
  for (auto& s : sparse.samples) s.position = datastore::as_float32(s.position);
  episode.robot = robot;
  episode.floor_cloud = without_channel(episode.floor_cloud, datastore::kLabelChannel);
  const auto labels = affordance::associate(sparse, episode.floor_cloud, episode.pose, theta);
  episode.floor_cloud.add_channel(datastore::kLabelChannel, labels);
  episode.sparse = std::move(sparse);
  episode.dense.reset();
}

std::vector<geom::Vec2> interpolation_anchors(const datastore::Episode& episode) {
  if (!episode.sparse) return {};
  const auto& sparse = *episode.sparse;
  return labeler::guard_ring(episode.target_position.head<2>(), episode.approach_normal, sparse.robot.arm_reach,
                             sparse.spacing);
}

void interpolate_episode(datastore::Episode& episode, const affordance::InterpolationParams& params) {
  if (!episode.sparse) {
    throw DataError("episode " + std::to_string(episode.episode_id) + " of config " + std::to_string(episode.config_id) +
                    " has no trial labels; run label first");
  }
  params.validate();
  const auto anchors = interpolation_anchors(episode);
  const auto points = affordance::labeled_points(*episode.sparse, anchors);
  auto dense = affordance::interpolate(points, episode.floor_cloud, params.k, params.sigma);
  dense.params = params;
  for (double& v : dense.values) v = datastore::as_float32(v);
  episode.dense = std::move(dense);
}

std::vector<datastore::Episode> make_episodes(const PipelineConfig& cfg, const scenegen::Configuration& config,
                                              std::uint64_t seed, const labeler::RobotSpec& robot, bool label,
                                              labeler::ViewpointStats* stats) {
  std::vector<datastore::Episode> out;
  if (config.targets.empty()) return out;
  const auto solids = config.solids();
  const auto obstacle_ids = config.obstacle_ids();
  const std::size_t n_targets = config.targets.size();

  for (std::size_t t = 0; t < n_targets; ++t) {
    const auto& target = config.targets[t];
    labeler::ViewpointParams params = cfg.viewpoints;
    params.count = static_cast<int>((static_cast<std::size_t>(cfg.views) + n_targets - 1 - t) / n_targets);
    if (params.count == 0) continue;
    const auto poses = labeler::sample_viewpoints(config, target.id, seed, params, stats);

    std::optional<labeler::SparseAffordance> sparse;
    for (const auto& pose : poses) {
      datastore::Episode e;
      e.episode_id = out.size();
      e.config_id = config.config_id;
      e.scene_id = config.scene_id;
      e.target_id = target.id;
      e.target_position = target.position;
      e.approach_normal = target.normal;
      e.pose = pose;
      e.intrinsics = params.intrinsics;
      e.robot = robot;
      auto render = geom::render_depth(solids, pose, params.intrinsics);
      e.depth = std::move(render.depth);
      e.ids = std::move(render.ids);
      e.global_cloud = datastore::quantized(datastore::attach_feature_channels(
          geom::backproject(e.depth, e.ids, e.intrinsics, pose), target.id, obstacle_ids));
      e.floor_cloud = geom::extract_floor(e.global_cloud, cfg.z_max);
      if (label) {
        label_episode(e, config, robot, cfg.spacing, cfg.theta);
        interpolate_episode(e, cfg.interpolation());
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<EpisodeRef> episodes_of(const datastore::DatasetManifest& manifest) {
  std::vector<EpisodeRef> refs;
  for (const auto& s : manifest.scenes) {
    for (const auto& c : s.configs) {
      for (auto e : c.episode_ids) refs.push_back({s.scene_id, c.config_id, e, s.split});
    }
  }
  return refs;
}

fs::path cmd_generate(const PipelineConfig& cfg, const LogSink& sink) {
  cfg.validate();
  const auto catalog = resolve_catalog(cfg);
  const auto robots = resolve_robots(cfg);
  const auto& robot = labeler::find_robot(robots, cfg.robot);
  robot.validate();
  Logger log(sink);

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create " + cfg.out.string() + ": " + ec.message());

  std::vector<datastore::SceneEntry> entries(static_cast<std::size_t>(cfg.scenes));
  parallel_for(entries.size(), cfg.effective_jobs(), [&](std::size_t s) {
    const SceneBundle bundle = make_scene(cfg, catalog, s);
    datastore::write_scene(bundle.scene, datastore::scene_dir(cfg.out, s));
    if (bundle.placement.dropped_obstacles > 0 || bundle.placement.dropped_targets > 0) {
      log({{"event", "placement_drops"},
           {"scene", s},
           {"obstacles", bundle.placement.dropped_obstacles},
           {"targets", bundle.placement.dropped_targets}});
    }
    datastore::SceneEntry entry{s, datastore::Split::Train, {}};
    labeler::ViewpointStats views;
    for (const auto& config : bundle.configs) {
      const auto dir = datastore::config_dir(cfg.out, s, config.config_id);
      datastore::write_configuration(config, dir);
      const auto episodes = make_episodes(cfg, config, view_seed(cfg.seed, s, config.config_id), robot,
                                          !cfg.render_only, &views);
      datastore::ConfigEntry ce{config.config_id, {}};
      for (const auto& e : episodes) {
        datastore::write_episode(e, datastore::episode_dir(cfg.out, s, config.config_id, e.episode_id));
        ce.episode_ids.push_back(e.episode_id);
      }
      entry.configs.push_back(std::move(ce));
    }
    std::size_t n_episodes = 0;
    for (const auto& c : entry.configs) n_episodes += c.episode_ids.size();
    log({{"event", "scene_done"},
         {"scene", s},
         {"configs", entry.configs.size()},
         {"episodes", n_episodes},
         {"view_retries", views.retries},
         {"views_dropped", views.dropped}});
    entries[s] = std::move(entry);
  });

  datastore::DatasetManifest manifest;
  manifest.seed = cfg.seed;
  manifest.scenes = std::move(entries);
  manifest.params = {{"robot", cfg.robot},
                     {"configs_per_scene", std::to_string(cfg.configs_per_scene)},
                     {"views", std::to_string(cfg.views)},
                     {"k", std::to_string(cfg.k)},
                     {"sigma", json(cfg.sigma).dump()},
                     {"theta", json(cfg.theta).dump()},
                     {"spacing", json(cfg.spacing).dump()},
                     {"zmax", json(cfg.z_max).dump()},
                     {"labeled", cfg.render_only ? "false" : "true"}};
  if (manifest.scenes.size() >= 2) {
    manifest = datastore::split_dataset(manifest, cfg.train_fraction, cfg.seed);
  }
  datastore::write_manifest(manifest, cfg.out);
  return cfg.out / "manifest.json";
}

void cmd_label(const fs::path& dataset, const PipelineConfig& cfg, const LogSink& sink) {
  const auto manifest = require_manifest(dataset);
  const auto robots = resolve_robots(cfg);
  const auto& robot = labeler::find_robot(robots, cfg.robot);
  Logger log(sink);
  parallel_for(manifest.scenes.size(), cfg.effective_jobs(), [&](std::size_t i) {
    const auto& s = manifest.scenes[i];
    for (const auto& c : s.configs) {
      const auto config = datastore::read_configuration(datastore::config_dir(dataset, s.scene_id, c.config_id));
      for (auto id : c.episode_ids) {
        const auto dir = datastore::episode_dir(dataset, s.scene_id, c.config_id, id);
        auto e = datastore::read_episode(dir);
        label_episode(e, config, robot, cfg.spacing, cfg.theta);
        datastore::write_episode(e, dir);
      }
    }
    log({{"event", "scene_labeled"}, {"scene", s.scene_id}, {"robot", robot.name}});
  });
}

void cmd_interpolate(const fs::path& dataset, const PipelineConfig& cfg, const LogSink& sink) {
  const auto manifest = require_manifest(dataset);
  const auto params = cfg.interpolation();
  params.validate();
  Logger log(sink);
  const auto refs = episodes_of(manifest);
  parallel_for(refs.size(), cfg.effective_jobs(), [&](std::size_t i) {
    const auto dir = episode_path(dataset, refs[i]);
    auto e = datastore::read_episode(dir);
    interpolate_episode(e, params);
    datastore::write_episode(e, dir);
  });
  log({{"event", "interpolated"}, {"episodes", refs.size()}, {"k", params.k}, {"sigma", params.sigma}});
}

Predictor parse_predictor(const std::string& text) {
  if (text == "random") return Predictor::Random;
  if (text == "heuristic") return Predictor::Heuristic;
  if (text == "gt" || text == "ground-truth") return Predictor::GroundTruth;
  throw UsageError("unknown predictor '" + text + "' (random, heuristic, gt)");
}

void cmd_predict(const fs::path& dataset, const fs::path& out, Predictor predictor, std::uint64_t seed,
                 const LogSink& sink) {
  const auto manifest = require_manifest(dataset);
  Logger log(sink);
  const auto refs = episodes_of(manifest);
  for (const auto& ref : refs) {
    const auto e = datastore::read_episode(episode_path(dataset, ref));
    std::vector<double> values;
    switch (predictor) {
      case Predictor::Random: {
        const eval::OperationalRegion region{e.target_position.head<2>(), e.approach_normal, e.robot.arm_reach};
        values = eval::predict_random(e.floor_cloud, region, derive_seed(seed, {ref.scene_id, ref.config_id, ref.episode_id})).values;
        break;
      }
      case Predictor::Heuristic:
        values = eval::predict_heuristic(e).values;
        break;
      case Predictor::GroundTruth:
        if (!e.dense) throw DataError("episode " + episode_path(dataset, ref).string() + " has no dense map");
        values = e.dense->values;
        break;
    }
    datastore::ArrayFile array{datastore::ElementType::Float32, {values.size()}, {}, {}};
    for (double v : values) array.f32.push_back(static_cast<float>(v));
    const auto dir = episode_path(out, ref);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    datastore::write_array(dir / "dense.bin", array);
  }
  log({{"event", "predicted"}, {"episodes", refs.size()}});
}

EvalResult cmd_eval(const fs::path& pred, const fs::path& dataset, const EvalOptions& options) {
  if (!(options.lambda > 0.0 && options.lambda < 1.0)) throw UsageError("--lambda must lie in (0, 1)");
  const auto manifest = require_manifest(dataset);
  eval::MetricsAccumulator acc;
  double wmse = 0.0;
  std::size_t n = 0;
  for (const auto& ref : episodes_of(manifest)) {
    if (options.split && ref.split != *options.split) continue;
    const auto gt = datastore::read_episode(episode_path(dataset, ref));
    if (!gt.dense) throw DataError("ground-truth episode " + episode_path(dataset, ref).string() + " has no dense map");
    const auto values = read_prediction(episode_path(pred, ref));
    acc.add(ref.scene_id, eval::metrics(values, gt.dense->values));
    wmse += eval::weighted_mse(values, gt.dense->values, options.lambda,
                               derive_seed(options.seed, {ref.scene_id, ref.config_id, ref.episode_id}));
    ++n;
  }
  if (n == 0) throw DataError("no episodes to evaluate");
  return {acc.report(), wmse / static_cast<double>(n)};
}

std::string to_json(const EvalResult& result) {
  json doc = json::parse(eval::to_json(result.report));
  doc["weighted_mse"] = result.weighted_mse;
  return doc.dump(2) + "\n";
}

std::size_t labeled_successes(const datastore::Episode& episode) {
  const auto channel = episode.floor_cloud.channel_index(datastore::kLabelChannel);
  if (!channel) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < episode.floor_cloud.size(); ++i) {
    if (episode.floor_cloud.channel(i, *channel) > 0.5) ++n;
  }
  return n;
}

std::vector<EpisodeRef> best_views(const datastore::DatasetManifest& manifest, const fs::path& dataset,
                                   std::optional<datastore::Split> split) {
  std::vector<EpisodeRef> out;
  for (const auto& s : manifest.scenes) {
    if (split && s.split != *split) continue;
    for (const auto& c : s.configs) {
      std::optional<EpisodeRef> best;
      std::size_t best_count = 0;
      for (auto id : c.episode_ids) {
        const EpisodeRef ref{s.scene_id, c.config_id, id, s.split};
        const auto n = labeled_successes(datastore::read_episode(episode_path(dataset, ref)));
        if (n > best_count) {
          best = ref;
          best_count = n;
        }
      }
      if (best) out.push_back(*best);
    }
  }
  return out;
}

eval::MsrReport cmd_msr(const fs::path& pred, const fs::path& dataset, std::size_t top_k,
                        std::optional<datastore::Split> split, MsrScope scope) {
  const auto manifest = require_manifest(dataset);
  std::vector<EpisodeRef> refs;
  if (scope == MsrScope::BestViewPerConfig) {
    refs = best_views(manifest, dataset, split);
  } else {
    for (const auto& ref : episodes_of(manifest)) {
      if (!split || ref.split == *split) refs.push_back(ref);
    }
  }
  std::vector<eval::MsrReport> reports;
  std::map<std::pair<std::uint64_t, std::uint64_t>, scenegen::Configuration> configs;
  for (const auto& ref : refs) {
    const auto key = std::make_pair(ref.scene_id, ref.config_id);
    auto it = configs.find(key);
    if (it == configs.end()) {
      it = configs.emplace(key, datastore::read_configuration(datastore::config_dir(dataset, ref.scene_id, ref.config_id))).first;
    }
    const auto e = datastore::read_episode(episode_path(dataset, ref));
    if (e.floor_cloud.empty()) continue;
    const auto values = read_prediction(episode_path(pred, ref));
    reports.push_back(eval::msr(values, e.floor_cloud, e.robot, it->second, e.target_id, top_k));
  }
  if (reports.empty()) throw DataError("no episodes to score in the requested split");
  return eval::aggregate(reports);
}

datastore::DatasetStats cmd_stats(const fs::path& dataset) {
  return datastore::stats(require_manifest(dataset), dataset);
}

std::string to_json(const datastore::DatasetStats& stats) {
  const auto row = [](const datastore::SplitCounts& c) {
    return json{{"scenes", c.scenes}, {"configurations", c.configurations}, {"episodes", c.episodes}};
  };
  return json{{"train", row(stats.train)}, {"test", row(stats.test)}, {"total", row(stats.total)}}.dump(2) + "\n";
}

datastore::DatasetStats cmd_split(const fs::path& dataset, double train_fraction, std::uint64_t seed) {
  auto manifest = datastore::split_dataset(require_manifest(dataset), train_fraction, seed);
  datastore::write_manifest(manifest, dataset);
  return datastore::stats(manifest, dataset);
}

}  // namespace affordgen::pipeline
