#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "affordgen/affordance.hpp"
#include "affordgen/datastore.hpp"
#include "affordgen/eval.hpp"
#include "affordgen/labeler.hpp"
#include "affordgen/scenegen.hpp"

namespace affordgen::pipeline {

namespace fs = std::filesystem;

/// Every knob of the generation pipeline, defaulting to module defaults.
struct PipelineConfig {
  std::uint64_t seed = 0;
  int scenes = 10;
  int configs_per_scene = 25;
  int views = 10;
  std::string robot = "panda";
  int k = 8;
  double sigma = 0.10;
  double theta = 0.05;
  double spacing = 0.10;
  double z_max = 0.02;
  double lambda = 0.7;
  double train_fraction = 456.0 / 569.0;
  int jobs = 0;  ///< 0 = hardware concurrency
  bool render_only = false;
  fs::path out = "dataset";
  std::optional<fs::path> catalog_path;
  std::optional<fs::path> robots_path;
  scenegen::SceneParams scene;
  labeler::ViewpointParams viewpoints;

  /// Throws UsageError when a value is outside its module's valid range.
  void validate() const;
  affordance::InterpolationParams interpolation() const { return {k, sigma, theta}; }
  int effective_jobs() const;
};

/// Receives one structured (JSON) log line at a time; may be called from
/// worker threads, but never concurrently.
using LogSink = std::function<void(const std::string&)>;

scenegen::AssetCatalog resolve_catalog(const PipelineConfig& cfg);
std::vector<labeler::RobotSpec> resolve_robots(const PipelineConfig& cfg);

/// Seeds of the independent random streams, derived from the pipeline seed.
std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t scene_index);
std::uint64_t config_seed(std::uint64_t seed, std::uint64_t scene_index);
std::uint64_t view_seed(std::uint64_t seed, std::uint64_t scene_index, std::uint64_t config_id);

struct SceneBundle {
  scenegen::SceneSpec scene;
  std::vector<scenegen::Configuration> configs;
  scenegen::PlacementStats placement;
};

SceneBundle make_scene(const PipelineConfig& cfg, const scenegen::AssetCatalog& catalog, std::uint64_t scene_index);

/// Renders the views of one configuration. View slots are assigned to the
/// configuration's targets round-robin; episode ids count retained views.
/// When `robot` is given the episodes are also labeled and interpolated.
std::vector<datastore::Episode> make_episodes(const PipelineConfig& cfg, const scenegen::Configuration& config,
                                              std::uint64_t seed, const labeler::RobotSpec& robot, bool label,
                                              labeler::ViewpointStats* stats = nullptr);

/// Attaches trial labels: sparse samples plus the thresholded association
/// as the floor cloud's "label" channel. Clears any dense map.
void label_episode(datastore::Episode& episode, const scenegen::Configuration& config,
                   const labeler::RobotSpec& robot, double spacing, double theta);

/// Zero anchors on the lattice around the trial grid (see labeler::guard_ring).
std::vector<geom::Vec2> interpolation_anchors(const datastore::Episode& episode);

/// Dense map from the episode's trial outcomes plus its zero anchors, which
/// keep values from spreading past the reachable area. Throws DataError if
/// the episode is unlabeled.
void interpolate_episode(datastore::Episode& episode, const affordance::InterpolationParams& params);

/// Visits every manifest episode (scene order, then config, then episode).
struct EpisodeRef {
  std::uint64_t scene_id;
  std::uint64_t config_id;
  std::uint64_t episode_id;
  datastore::Split split;
};
std::vector<EpisodeRef> episodes_of(const datastore::DatasetManifest& manifest);

// Subcommands. Each returns what it prints on standard output.

/// Generates scenes, configurations and episodes under cfg.out and writes the
/// manifest last. Returns the manifest path.
fs::path cmd_generate(const PipelineConfig& cfg, const LogSink& log = {});
void cmd_label(const fs::path& dataset, const PipelineConfig& cfg, const LogSink& log = {});
void cmd_interpolate(const fs::path& dataset, const PipelineConfig& cfg, const LogSink& log = {});

enum class Predictor { Random, Heuristic, GroundTruth };
Predictor parse_predictor(const std::string& text);
/// Writes one dense.bin per episode under `out`, mirroring the dataset tree.
void cmd_predict(const fs::path& dataset, const fs::path& out, Predictor predictor, std::uint64_t seed,
                 const LogSink& log = {});

struct EvalOptions {
  std::optional<datastore::Split> split;  ///< empty = all episodes
  double lambda = 0.7;
  std::uint64_t seed = 0;
};

/// Metrics of the dense.bin maps under `pred` against the ground-truth maps
/// of `dataset`. Also reports the weighted MSE.
struct EvalResult {
  eval::MetricsReport report;
  double weighted_mse = 0.0;
};
EvalResult cmd_eval(const fs::path& pred, const fs::path& dataset, const EvalOptions& options = {});
std::string to_json(const EvalResult& result);

/// Number of floor points whose association label is a success.
std::size_t labeled_successes(const datastore::Episode& episode);

/// One episode per configuration: the view with the most labeled successes,
/// lowest episode id on ties. Configurations without any are skipped.
std::vector<EpisodeRef> best_views(const datastore::DatasetManifest& manifest, const fs::path& dataset,
                                   std::optional<datastore::Split> split);

enum class MsrScope { AllEpisodes, BestViewPerConfig };

/// Views without visible floor offer no location to rank and are skipped.
eval::MsrReport cmd_msr(const fs::path& pred, const fs::path& dataset, std::size_t top_k,
                        std::optional<datastore::Split> split = datastore::Split::Test,
                        MsrScope scope = MsrScope::AllEpisodes);

datastore::DatasetStats cmd_stats(const fs::path& dataset);
std::string to_json(const datastore::DatasetStats& stats);

/// Re-assigns train/test by scene and rewrites the manifest.
datastore::DatasetStats cmd_split(const fs::path& dataset, double train_fraction, std::uint64_t seed);

}  // namespace affordgen::pipeline
