#pragma once

// Scalar-loop metric definitions, one pass per quantity.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

struct Scores {
  double rmse = 0.0;
  double log_mse = 0.0;
  std::optional<double> pcc;
  std::optional<double> sim;
};

inline Scores metrics(const std::vector<double>& p, const std::vector<double>& g) {
  const double n = static_cast<double>(p.size());
  Scores s;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - g[i]) * (p[i] - g[i]);
  s.rmse = std::sqrt(acc / n);

  acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::log(1.0 + g[i]) - std::log(1.0 + p[i]);
    acc += d * d;
  }
  s.log_mse = acc / n;

  double mp = 0.0;
  double mg = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mp += p[i] / n;
    mg += g[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sxy += (p[i] - mp) * (g[i] - mg);
    sxx += (p[i] - mp) * (p[i] - mp);
    syy += (g[i] - mg) * (g[i] - mg);
  }
  if (sxx > 0.0 && syy > 0.0) s.pcc = sxy / std::sqrt(sxx * syy);

  double dot = 0.0;
  double np = 0.0;
  double ng = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * g[i];
    np += p[i] * p[i];
    ng += g[i] * g[i];
  }
  if (np > 0.0 && ng > 0.0) s.sim = dot / std::sqrt(np * ng);
  return s;
}

/// Weighted MSE with the coin flips drawn explicitly from mt19937_64(seed):
/// a flip is heads when the top 53 bits, scaled to [0,1), are below 0.5,
/// i.e. when the draw's most significant bit is 0.
inline double weighted_mse(const std::vector<double>& p, const std::vector<double>& g, double lambda,
                           std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool heads = (engine() >> 63) == 0;
    const double w = (g[i] == 0.0 && heads) ? lambda : 1.0;
    acc += w * (p[i] - g[i]) * (p[i] - g[i]);
  }
  return acc / static_cast<double>(p.size());
}

}  // namespace oracle
