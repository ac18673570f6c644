// affordgen: generate, label and score synthetic navigation-affordance datasets.

#include <iostream>

#include "CLI11.hpp"
#include "affordgen/errors.hpp"
#include "affordgen/pipeline.hpp"
#include "json.hpp"

namespace {

namespace pl = affordgen::pipeline;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

int fail(int code, const std::string& kind, const std::string& message, json extra = json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  std::cerr << extra.dump() << std::endl;
  return code;
}

void log_line(const std::string& line) { std::cerr << line << '\n'; }

std::optional<affordgen::datastore::Split> split_option(const std::string& text) {
  if (text == "all") return std::nullopt;
  return affordgen::datastore::parse_split(text);
}

void add_interpolation_flags(CLI::App* cmd, pl::PipelineConfig& cfg) {
  cmd->add_option("--k", cfg.k, "neighbors per floor point")->capture_default_str();
  cmd->add_option("--sigma", cfg.sigma, "Gaussian kernel width, meters")->capture_default_str();
  cmd->add_option("--theta", cfg.theta, "association distance threshold, meters")->capture_default_str();
}

void add_label_flags(CLI::App* cmd, pl::PipelineConfig& cfg) {
  cmd->add_option("--robot", cfg.robot, "robot name")->capture_default_str();
  cmd->add_option("--robots", cfg.robots_path, "robot catalog JSON (default: built-in robots)");
  cmd->add_option("--spacing", cfg.spacing, "base grid spacing, meters")->capture_default_str();
}

void add_jobs_flag(CLI::App* cmd, pl::PipelineConfig& cfg) {
  cmd->add_option("--jobs", cfg.jobs, "worker threads (0 = available cores)")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Synthetic navigation-affordance dataset tool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "affordgen 0.1.0");

  pl::PipelineConfig cfg;
  std::string dataset;
  std::string pred;
  std::string out;
  std::string predictor = "heuristic";
  std::string eval_split = "all";
  std::string msr_split = "test";
  std::string csv;
  std::size_t top = 5;
  bool best_view = false;

  auto* generate = app.add_subcommand("generate", "generate scenes, configurations and labeled episodes");
  generate->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  generate->add_option("--scenes", cfg.scenes, "number of scenes")->capture_default_str();
  generate->add_option("--configs-per-scene", cfg.configs_per_scene, "configurations per scene")->capture_default_str();
  generate->add_option("--views", cfg.views, "camera views per configuration")->capture_default_str();
  add_label_flags(generate, cfg);
  add_interpolation_flags(generate, cfg);
  generate->add_option("--zmax", cfg.z_max, "floor height threshold, meters")->capture_default_str();
  generate->add_option("--lambda", cfg.lambda, "zero-label loss weight recorded with the dataset")->capture_default_str();
  generate->add_option("--train-fraction", cfg.train_fraction, "fraction of scenes assigned to train")
      ->capture_default_str();
  generate->add_option("--catalog", cfg.catalog_path, "asset catalog JSON (default: built-in catalog)");
  generate->add_flag("--render-only", cfg.render_only, "skip labeling and interpolation");
  generate->add_option("--out", cfg.out, "output root")->capture_default_str();
  add_jobs_flag(generate, cfg);

  auto* label = app.add_subcommand("label", "attach trial labels to every episode of a dataset");
  label->add_option("dataset", dataset, "dataset root")->required();
  add_label_flags(label, cfg);
  label->add_option("--theta", cfg.theta, "association distance threshold, meters")->capture_default_str();
  add_jobs_flag(label, cfg);

  auto* interpolate = app.add_subcommand("interpolate", "write dense affordance maps from trial labels");
  interpolate->add_option("dataset", dataset, "dataset root")->required();
  add_interpolation_flags(interpolate, cfg);
  add_jobs_flag(interpolate, cfg);

  auto* predict = app.add_subcommand("predict", "write reference predictions for every episode");
  predict->add_option("dataset", dataset, "dataset root")->required();
  predict->add_option("--out", out, "prediction root")->required();
  predict->add_option("--predictor", predictor, "random, heuristic or gt")->capture_default_str();
  predict->add_option("--seed", cfg.seed, "seed of the random predictor")->capture_default_str();

  auto* evaluate = app.add_subcommand("eval", "score predicted maps against ground truth");
  evaluate->add_option("pred", pred, "prediction root")->required();
  evaluate->add_option("dataset", dataset, "ground-truth dataset root")->required();
  evaluate->add_option("--split", eval_split, "all, train or test")->capture_default_str();
  evaluate->add_option("--lambda", cfg.lambda, "zero-label weight of the weighted MSE")->capture_default_str();
  evaluate->add_option("--seed", cfg.seed, "seed of the weighted-MSE draws")->capture_default_str();
  evaluate->add_option("--csv", csv, "also write per-scene metrics as CSV to this path");

  auto* msr = app.add_subcommand("msr", "manipulation success rate of predicted maps");
  msr->add_option("pred", pred, "prediction root")->required();
  msr->add_option("dataset", dataset, "dataset root")->required();
  msr->add_option("--top", top, "number of ranked locations")->capture_default_str()->check(CLI::PositiveNumber);
  msr->add_option("--split", msr_split, "all, train or test")->capture_default_str();
  msr->add_flag("--best-view", best_view,
                "score one view per configuration: the one seeing the most labeled successes");

  auto* stats = app.add_subcommand("stats", "scene, configuration and episode counts per split");
  stats->add_option("dataset", dataset, "dataset root")->required();

  double fraction = cfg.train_fraction;
  auto* resplit = app.add_subcommand("split", "reassign scenes to train and test");
  resplit->add_option("dataset", dataset, "dataset root")->required();
  resplit->add_option("--train-fraction", fraction, "fraction of scenes assigned to train")->capture_default_str();
  resplit->add_option("--seed", cfg.seed, "shuffle seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitUsage, "usage", e.what());
  }

  if (*generate) {
    const auto manifest = pl::cmd_generate(cfg, log_line);
    std::cout << json{{"manifest", manifest.string()}}.dump() << '\n';
  } else if (*label) {
    pl::cmd_label(dataset, cfg, log_line);
    std::cout << json{{"labeled", dataset}, {"robot", cfg.robot}}.dump() << '\n';
  } else if (*interpolate) {
    pl::cmd_interpolate(dataset, cfg, log_line);
    std::cout << json{{"interpolated", dataset}}.dump() << '\n';
  } else if (*predict) {
    pl::cmd_predict(dataset, out, pl::parse_predictor(predictor), cfg.seed, log_line);
    std::cout << json{{"predictions", out}, {"predictor", predictor}}.dump() << '\n';
  } else if (*evaluate) {
    const auto result = pl::cmd_eval(pred, dataset, {split_option(eval_split), cfg.lambda, cfg.seed});
    if (!csv.empty()) affordgen::datastore::write_text(csv, affordgen::eval::per_scene_csv(result.report));
    std::cout << pl::to_json(result);
  } else if (*msr) {
    std::cout << affordgen::eval::to_json(pl::cmd_msr(pred, dataset, top, split_option(msr_split),
                                                      best_view ? pl::MsrScope::BestViewPerConfig : pl::MsrScope::AllEpisodes));
  } else if (*stats) {
    std::cout << pl::to_json(pl::cmd_stats(dataset));
  } else if (*resplit) {
    std::cout << pl::to_json(pl::cmd_split(dataset, fraction, cfg.seed));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const affordgen::UsageError& e) {
    return fail(kExitUsage, "usage", e.what());
  } catch (const affordgen::FormatError& e) {
    return fail(kExitData, "format", e.what(),
                {{"kind", affordgen::FormatError::kind_name(e.kind())}, {"file", e.file()}, {"offset", e.offset()}});
  } catch (const affordgen::DataError& e) {
    return fail(kExitData, "data", e.what());
  } catch (const affordgen::IoError& e) {
    return fail(kExitIo, "io", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kExitIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
}
