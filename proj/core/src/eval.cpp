#include "affordgen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "affordgen/errors.hpp"
#include "affordgen/rng.hpp"
#include "json.hpp"

namespace affordgen::eval {

using nlohmann::json;

namespace {

void check_pair(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) {
    throw UsageError("prediction has " + std::to_string(pred.size()) + " values, ground truth " +
                     std::to_string(gt.size()));
  }
  if (pred.empty()) {
    throw UsageError("cannot score empty maps");
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const Metrics& m) {
  return {{"rmse", m.rmse}, {"log_mse", m.log_mse}, {"pcc", optional_json(m.pcc)}, {"sim", optional_json(m.sim)}};
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(17);
  s << *v;
  return s.str();
}

}  // namespace

Metrics metrics(std::span<const double> pred, std::span<const double> gt) {
  check_pair(pred, gt);
  const auto n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0.0 || gt[i] < 0.0) {
      throw UsageError("metrics expect non-negative values (index " + std::to_string(i) + ")");
    }
  }

  double se = 0.0;
  double log_se = 0.0;
  double sum_p = 0.0;
  double sum_g = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = gt[i] - pred[i];
    se += d * d;
    const double ld = std::log1p(gt[i]) - std::log1p(pred[i]);
    log_se += ld * ld;
    sum_p += pred[i];
    sum_g += gt[i];
  }

  Metrics m;
  m.rmse = std::sqrt(se / n);
  m.log_mse = log_se / n;

  const double mean_p = sum_p / n;
  const double mean_g = sum_g / n;
  double cov = 0.0;
  double var_p = 0.0;
  double var_g = 0.0;
  double dot = 0.0;
  double norm_p = 0.0;
  double norm_g = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mean_p;
    const double dg = gt[i] - mean_g;
    cov += dp * dg;
    var_p += dp * dp;
    var_g += dg * dg;
    dot += pred[i] * gt[i];
    norm_p += pred[i] * pred[i];
    norm_g += gt[i] * gt[i];
  }
  if (var_p > 0.0 && var_g > 0.0) {
    m.pcc = std::clamp(cov / std::sqrt(var_p * var_g), -1.0, 1.0);
  }
  if (norm_p > 0.0 && norm_g > 0.0) {
    m.sim = std::clamp(dot / (std::sqrt(norm_p) * std::sqrt(norm_g)), -1.0, 1.0);
  }
  return m;
}

Metrics metrics(const affordance::DenseAffordanceMap& pred, const affordance::DenseAffordanceMap& gt) {
  return metrics(std::span<const double>(pred.values), std::span<const double>(gt.values));
}

double mse(std::span<const double> pred, std::span<const double> gt) {
  check_pair(pred, gt);
  double se = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) se += (pred[i] - gt[i]) * (pred[i] - gt[i]);
  return se / static_cast<double>(pred.size());
}

double weighted_mse(std::span<const double> pred, std::span<const double> gt, double lambda, std::uint64_t seed) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw UsageError("weighted_mse: lambda must lie in (0, 1)");
  }
  check_pair(pred, gt);
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool coin = rng.bernoulli(0.5);
    const double w = (gt[i] == 0.0 && coin) ? lambda : 1.0;
    total += w * (pred[i] - gt[i]) * (pred[i] - gt[i]);
  }
  return total / static_cast<double>(pred.size());
}

void MetricsAccumulator::Sums::add(const Metrics& m) {
  rmse += m.rmse;
  log_mse += m.log_mse;
  ++n;
  if (m.pcc) {
    pcc += *m.pcc;
    ++n_pcc;
  }
  if (m.sim) {
    sim += *m.sim;
    ++n_sim;
  }
}

Metrics MetricsAccumulator::Sums::mean() const {
  Metrics m;
  if (n > 0) {
    m.rmse = rmse / static_cast<double>(n);
    m.log_mse = log_mse / static_cast<double>(n);
  }
  if (n_pcc > 0) m.pcc = pcc / static_cast<double>(n_pcc);
  if (n_sim > 0) m.sim = sim / static_cast<double>(n_sim);
  return m;
}

void MetricsAccumulator::add(std::uint64_t scene_id, const Metrics& m) {
  total_.add(m);
  scenes_[scene_id].add(m);
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.overall = total_.mean();
  r.maps = total_.n;
  for (const auto& [id, sums] : scenes_) r.per_scene[id] = sums.mean();
  return r;
}

std::string to_json(const MetricsReport& report) {
  json scenes = json::object();
  for (const auto& [id, m] : report.per_scene) scenes[std::to_string(id)] = metrics_json(m);
  json doc = metrics_json(report.overall);
  doc["maps"] = report.maps;
  doc["per_scene"] = scenes;
  return doc.dump(2) + "\n";
}

std::string per_scene_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "scene_id,rmse,log_mse,pcc,sim\n";
  for (const auto& [id, m] : report.per_scene) {
    out << id << ',' << m.rmse << ',' << m.log_mse << ',' << csv_cell(m.pcc) << ',' << csv_cell(m.sim) << '\n';
  }
  return out.str();
}

std::vector<std::size_t> top_indices(std::span<const double> values, std::size_t k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t m = std::min(k, values.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });
  order.resize(m);
  return order;
}

MsrReport msr(std::span<const double> pred, const geom::PointCloud& floor, const labeler::RobotSpec& robot,
              const scenegen::Configuration& config, std::uint32_t target_id, std::size_t top_k) {
  if (pred.empty()) {
    throw UsageError("msr: empty affordance map");
  }
  if (pred.size() != floor.size()) {
    throw UsageError("msr: map has " + std::to_string(pred.size()) + " values for " + std::to_string(floor.size()) +
                     " floor points");
  }
  if (top_k == 0) {
    throw UsageError("msr: top_k must be at least 1");
  }
  const auto top = top_indices(pred, top_k);
  std::size_t successes = 0;
  bool first = false;
  for (std::size_t rank = 0; rank < top.size(); ++rank) {
    const bool ok = labeler::feasible(robot, floor.point(top[rank]).head<2>(), config, target_id);
    if (rank == 0) first = ok;
    successes += ok ? 1 : 0;
  }
  MsrReport r;
  r.top1 = first ? 1.0 : 0.0;
  r.top_k = static_cast<double>(successes) / static_cast<double>(top.size());
  r.k = top_k;
  r.trials = 1;
  return r;
}

MsrReport aggregate(std::span<const MsrReport> reports) {
  MsrReport out;
  if (reports.empty()) return out;
  out.k = reports.front().k;
  double top1 = 0.0;
  double top_k = 0.0;
  for (const auto& r : reports) {
    top1 += r.top1 * static_cast<double>(r.trials);
    top_k += r.top_k * static_cast<double>(r.trials);
    out.trials += r.trials;
  }
  if (out.trials > 0) {
    out.top1 = top1 / static_cast<double>(out.trials);
    out.top_k = top_k / static_cast<double>(out.trials);
  }
  return out;
}

std::string to_json(const MsrReport& report) {
  const json doc = {{"top1", report.top1}, {"top" + std::to_string(report.k), report.top_k}, {"trials", report.trials}};
  return doc.dump(2) + "\n";
}

bool OperationalRegion::contains(const geom::Vec2& p) const {
  const geom::Vec2 d = p - target_floor;
  return d.norm() <= radius && d.dot(normal) < 0.0;
}

affordance::DenseAffordanceMap predict_random(const geom::PointCloud& floor, const OperationalRegion& region,
                                              std::uint64_t seed) {
  Rng rng(seed);
  affordance::DenseAffordanceMap map;
  map.values.resize(floor.size());
  for (std::size_t i = 0; i < floor.size(); ++i) {
    const double draw = rng.uniform();
    map.values[i] = region.contains(floor.point(i).head<2>()) ? draw : 0.0;
  }
  return map;
}

affordance::DenseAffordanceMap predict_heuristic(const datastore::Episode& episode, const HeuristicParams& params) {
  const auto& robot = episode.robot;
  const auto& cloud = episode.global_cloud;
  const auto id_channel = cloud.channel_index(geom::kIdChannel);
  if (!id_channel) {
    throw UsageError("predict_heuristic: global cloud has no id channel");
  }

  std::map<std::uint32_t, geom::Rect> footprints;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto id = static_cast<std::uint32_t>(cloud.channel(i, *id_channel));
    if (id == 0 || id == episode.target_id) continue;
    const geom::Vec2 p = cloud.point(i).head<2>();
    auto [it, inserted] = footprints.try_emplace(id, geom::Rect{p, p});
    if (!inserted) {
      it->second.min = it->second.min.cwiseMin(p);
      it->second.max = it->second.max.cwiseMax(p);
    }
  }

  affordance::DenseAffordanceMap map;
  map.values.resize(episode.floor_cloud.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < episode.floor_cloud.size(); ++i) {
    const geom::Vec2 p = episode.floor_cloud.point(i).head<2>();
    const double reach = (geom::Vec3(p.x(), p.y(), robot.base_height) - episode.target_position).norm();
    double band = 1.0;
    if (reach < robot.min_reach) {
      band = std::max(0.0, 1.0 - (robot.min_reach - reach) / params.taper);
    } else if (reach > robot.arm_reach) {
      band = std::max(0.0, 1.0 - (reach - robot.arm_reach) / params.taper);
    }
    double gap = robot.base_radius;
    for (const auto& [id, rect] : footprints) gap = std::min(gap, geom::distance_point_rect(p, rect));
    const double score = band * gap / robot.base_radius;
    map.values[i] = score;
    peak = std::max(peak, score);
  }
  if (peak > 0.0) {
    for (double& v : map.values) v /= peak;
  }
  return map;
}

}  // namespace affordgen::eval
