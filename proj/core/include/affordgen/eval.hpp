#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affordgen/affordance.hpp"
#include "affordgen/datastore.hpp"
#include "affordgen/labeler.hpp"
#include "affordgen/scenegen.hpp"

namespace affordgen::eval {

/// Per-map scores. PCC and SIM are empty when undefined (zero variance or
/// zero norm) and are then left out of any average.
struct Metrics {
  double rmse = 0.0;
  double log_mse = 0.0;
  std::optional<double> pcc;
  std::optional<double> sim;
};

struct MetricsReport {
  Metrics overall;
  std::map<std::uint64_t, Metrics> per_scene;
  std::size_t maps = 0;
};

/// RMSE, logMSE (natural log of 1 + value), Pearson correlation and cosine
/// similarity of the two whole vectors. Throws UsageError on length mismatch,
/// empty input, or negative values.
Metrics metrics(std::span<const double> pred, std::span<const double> gt);
Metrics metrics(const affordance::DenseAffordanceMap& pred, const affordance::DenseAffordanceMap& gt);

double mse(std::span<const double> pred, std::span<const double> gt);

/// Mean of W_i (pred_i - gt_i)², where W_i = lambda on zero-valued ground
/// truth with probability 0.5 and 1 otherwise. One Bernoulli draw is taken
/// per element, in index order, from Rng(seed).
double weighted_mse(std::span<const double> pred, std::span<const double> gt, double lambda, std::uint64_t seed);

/// Deterministic fold of per-map metrics, in insertion order.
class MetricsAccumulator {
public:
  void add(std::uint64_t scene_id, const Metrics& m);
  MetricsReport report() const;

private:
  struct Sums {
    double rmse = 0.0, log_mse = 0.0, pcc = 0.0, sim = 0.0;
    std::size_t n = 0, n_pcc = 0, n_sim = 0;
    void add(const Metrics& m);
    Metrics mean() const;
  };
  Sums total_;
  std::map<std::uint64_t, Sums> scenes_;
};

std::string to_json(const MetricsReport& report);
/// Columns scene_id,rmse,log_mse,pcc,sim; undefined values are empty cells.
std::string per_scene_csv(const MetricsReport& report);

struct MsrReport {
  double top1 = 0.0;
  double top_k = 0.0;  ///< mean success over the top-k locations
  std::size_t k = 5;
  std::size_t trials = 0;
};

/// Indices of the k largest values, highest first, ties by lower index.
std::vector<std::size_t> top_indices(std::span<const double> values, std::size_t k);

/// Re-runs the feasibility oracle at the top-ranked floor points.
/// Throws UsageError for an empty map or a map/floor size mismatch.
MsrReport msr(std::span<const double> pred, const geom::PointCloud& floor, const labeler::RobotSpec& robot,
              const scenegen::Configuration& config, std::uint32_t target_id, std::size_t top_k = 5);

/// Averages per-trial reports.
MsrReport aggregate(std::span<const MsrReport> reports);
std::string to_json(const MsrReport& report);

/// Semicircular operational region in front of a target.
struct OperationalRegion {
  geom::Vec2 target_floor = geom::Vec2::Zero();
  geom::Vec2 normal = geom::Vec2::UnitY();
  double radius = 0.85;

  bool contains(const geom::Vec2& p) const;
};

/// Uniform [0,1) scores inside the region, 0 outside; one draw per point.
affordance::DenseAffordanceMap predict_random(const geom::PointCloud& floor, const OperationalRegion& region,
                                              std::uint64_t seed);

struct HeuristicParams {
  double taper = 0.10;  ///< reach-band falloff width, meters
};

/// Training-free reference predictor: reach band times base clearance.
///
/// reach_band is 1 where the shoulder-to-target distance lies in
/// [min_reach, arm_reach] and falls linearly to 0 over `taper` outside it.
/// clearance is the floor distance to the nearest footprint of a non-target
/// object seen in the global cloud (per-id xy bounds), clamped at the base
/// radius and divided by it. Scores are normalized by their maximum.
affordance::DenseAffordanceMap predict_heuristic(const datastore::Episode& episode, const HeuristicParams& params = {});

}  // namespace affordgen::eval
