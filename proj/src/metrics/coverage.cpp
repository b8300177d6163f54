#include <cmath>
#include <limits>
#include <string>

#include "msviper/core/errors.hpp"
#include "msviper/core/subspace.hpp"
#include "msviper/metrics/metrics.hpp"
#include "msviper/simd/kernels.hpp"

namespace msviper::metrics {

using nlohmann::json;

void CoverageParams::validate(CoverageMethod method) const {
  if (K < 1) throw ConfigError("coverage K must be >= 1");
  if (m < 1) throw ConfigError("coverage m must be >= 1");
  if (n_E < 1) throw ConfigError("coverage n_E must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("coverage epsilon must lie in [0, 1]");
  if (p.size() != static_cast<std::size_t>(K)) throw ConfigError("coverage p needs K rows");
  for (const auto& row : p) {
    if (row.size() != static_cast<std::size_t>(n_E)) throw ConfigError("coverage p rows need n_E entries");
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("coverage probabilities must lie in [0, 1]");
    }
  }
  if (method == CoverageMethod::msviper && m % n_E != 0) {
    throw ConfigError("msviper coverage needs m divisible by n_E (m=" + std::to_string(m) +
                      ", n_E=" + std::to_string(n_E) + ")");
  }
}

std::vector<double> coverage_hit_probabilities(const CoverageParams& params, CoverageMethod method) {
  params.validate(method);
  std::vector<double> hit;
  hit.reserve(params.p.size());
  for (const auto& row : params.p) {
    if (method == CoverageMethod::viper) {
      hit.push_back(1.0 - std::pow(1.0 - row.back(), params.m));
    } else {
      const int per_env = params.m / params.n_E;
      double miss = 1.0;
      for (double pe : row) miss *= std::pow(1.0 - pe, per_env);
      hit.push_back(1.0 - miss);
    }
  }
  return hit;
}

std::vector<double> poisson_binomial(std::span<const double> probs) {
  std::vector<double> dist(probs.size() + 2, 0.0);
  dist[0] = 1.0;
  for (std::size_t i = 0; i < probs.size(); ++i) simd::poisson_binomial_step(dist, i, probs[i]);
  dist.resize(probs.size() + 1);
  return dist;
}

int coverage_threshold(int K, double epsilon) {
  // The slack keeps eps*K that is integral up to rounding from rounding up.
  const double need = std::ceil(epsilon * K - 1e-9);
  return need < 0.0 ? 0 : static_cast<int>(need);
}

double coverage_probability(const CoverageParams& params, CoverageMethod method) {
  const auto hit = coverage_hit_probabilities(params, method);
  const auto dist = poisson_binomial(hit);
  const int need = coverage_threshold(params.K, params.epsilon);
  double tail = 0.0;
  for (std::size_t j = static_cast<std::size_t>(need); j < dist.size(); ++j) tail += dist[j];
  return std::min(1.0, std::max(0.0, tail));
}

CoverageParams coverage_params_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("coverage parameters must be an object");
  CoverageParams p;
  for (const auto& [k, v] : doc.items()) {
    try {
      if (k == "K") p.K = v.get<int>();
      else if (k == "m") p.m = v.get<int>();
      else if (k == "n_E") p.n_E = v.get<int>();
      else if (k == "p") p.p = v.get<std::vector<std::vector<double>>>();
      else if (k == "epsilon") p.epsilon = v.get<double>();
      else throw ConfigError("unknown coverage key '" + k + "'");
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + k + "': " + e.what());
    }
  }
  return p;
}

double empirical_critical_coverage(const cart::PairSet& D, const std::vector<StateVector>& critical,
                                   double tolerance) {
  if (critical.empty()) return 0.0;
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  std::size_t covered = 0;
  for (const auto& c : critical) {
    if (D.empty()) break;
    if (c.size() != D.dimension()) throw DimensionError("critical state has the wrong dimension");
    NodeSubspace box = NodeSubspace::unbounded(c.size());
    for (std::size_t f = 0; f < c.size(); ++f) {
      // Membership is lower < x <= upper; step the lower bound down one ulp
      // so the tolerance band is closed on both sides.
      box.lower[f] = std::nextafter(c[f] - tolerance, -std::numeric_limits<double>::infinity());
      box.upper[f] = c[f] + tolerance;
    }
    const auto inside = box.contains_batch(D.states());
    for (auto flag : inside) {
      if (flag != 0) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(critical.size());
}

}  // namespace msviper::metrics
