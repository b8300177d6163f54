#include <cmath>
#include <string>

#include "msviper/core/errors.hpp"
#include "msviper/core/parallel.hpp"
#include "msviper/core/random.hpp"
#include "msviper/metrics/metrics.hpp"
#include "msviper/simd/kernels.hpp"

namespace msviper::metrics {

using nlohmann::json;

double vibration_vb(std::span<const envs::TerrainSignals> history, double gamma) {
  if (history.size() != kVibrationHistory) {
    throw ArityError("V_b needs exactly 4 timesteps of history, got " + std::to_string(history.size()));
  }
  double vb = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double lag = static_cast<double>(history.size() - 1 - i);
    vb += std::pow(gamma, lag) * (std::abs(history[i].omega_r) + std::abs(history[i].omega_p));
  }
  return vb;
}

double vibration_vb_from_state(const StateLayout& layout, std::span<const double> state, double gamma) {
  layout.check_state(state);
  const auto& rates = layout.group(kAngularVelocityGroup);
  if (rates.size() != 2 * kVibrationHistory) {
    throw ArityError("angular-velocity group must hold 8 features");
  }
  std::vector<double> weights(rates.size());
  std::vector<double> values(rates.size());
  double w = 1.0;
  for (std::size_t k = 0; k < kVibrationHistory; ++k) {
    weights[2 * k] = weights[2 * k + 1] = w;
    values[2 * k] = state[rates[2 * k]];
    values[2 * k + 1] = state[rates[2 * k + 1]];
    w *= gamma;
  }
  return simd::weighted_abs_sum(weights, values);
}

std::vector<double> vibration_series(const envs::EpisodeLog& log, double gamma) {
  std::vector<double> out;
  out.reserve(log.signals.size());
  std::vector<envs::TerrainSignals> window(kVibrationHistory);
  for (const auto& sig : log.signals) {
    for (std::size_t i = 0; i + 1 < window.size(); ++i) window[i] = window[i + 1];
    window.back() = sig;
    out.push_back(vibration_vb(window, gamma));
  }
  return out;
}

void OscillationParams::validate() const {
  if (window < 2) throw ConfigError("oscillation window must be >= 2");
  if (min_alternations < 1 || min_alternations > window - 1) {
    throw ConfigError("min_alternations must lie in [1, window - 1]");
  }
}

int sign_alternations(std::span<const double> angular) {
  int count = 0;
  for (std::size_t i = 1; i < angular.size(); ++i) {
    if ((angular[i] > 0.0 && angular[i - 1] < 0.0) || (angular[i] < 0.0 && angular[i - 1] > 0.0)) ++count;
  }
  return count;
}

bool oscillation_fires(std::span<const double> angular_window, const OscillationParams& params) {
  return static_cast<int>(angular_window.size()) >= params.window &&
         sign_alternations(angular_window.last(static_cast<std::size_t>(params.window))) >=
             params.min_alternations;
}

OscillationMetrics oscillation_metrics(std::span<const double> angular, const OscillationParams& params) {
  params.validate();
  OscillationMetrics m;
  m.steps = angular.size();
  if (angular.size() >= 2) {
    double delta = 0.0;
    for (std::size_t i = 1; i < angular.size(); ++i) delta += std::abs(angular[i] - angular[i - 1]);
    m.differences = angular.size() - 1;
    m.c_osc_delta = delta / static_cast<double>(m.differences);
  }
  const auto L = static_cast<std::size_t>(params.window);
  if (angular.size() >= L) {
    std::vector<char> covered(angular.size(), 0);
    for (std::size_t end = L; end <= angular.size(); ++end) {
      if (oscillation_fires(angular.subspan(end - L, L), params)) {
        for (std::size_t i = end - L; i < end; ++i) covered[i] = 1;
      }
    }
    std::size_t n = 0;
    for (char c : covered) n += c != 0 ? 1 : 0;
    m.c_osc_pct = static_cast<double>(n) / static_cast<double>(angular.size());
  }
  return m;
}

std::vector<double> angular_sequence(const envs::EpisodeLog& log, const ActionCatalog& actions) {
  std::vector<double> out;
  out.reserve(log.actions.size());
  for (ActionId a : log.actions) out.push_back(actions.at(static_cast<std::size_t>(a)).angular);
  return out;
}

OscillationMetrics oscillation_metrics(const std::vector<envs::EpisodeLog>& logs,
                                       const ActionCatalog& actions, const OscillationParams& params) {
  OscillationMetrics total;
  double pct_steps = 0.0;
  double delta_sum = 0.0;
  for (const auto& log : logs) {
    const auto m = oscillation_metrics(angular_sequence(log, actions), params);
    total.steps += m.steps;
    total.differences += m.differences;
    pct_steps += m.c_osc_pct * static_cast<double>(m.steps);
    delta_sum += m.c_osc_delta * static_cast<double>(m.differences);
  }
  if (total.steps > 0) total.c_osc_pct = pct_steps / static_cast<double>(total.steps);
  if (total.differences > 0) total.c_osc_delta = delta_sum / static_cast<double>(total.differences);
  return total;
}

bool has_freeze_event(const envs::EpisodeLog& log, int k) {
  int run = 0;
  for (const auto& info : log.infos) {
    run = info.froze_this_step ? run + 1 : 0;
    if (run >= k) return true;
  }
  return false;
}

std::vector<envs::EpisodeLog> rollouts(const Policy& policy, const envs::ScenarioSpec& scenario,
                                       int trials, std::uint64_t seed, int jobs) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  std::vector<envs::EpisodeLog> logs(static_cast<std::size_t>(trials));
  parallel_for(jobs, logs.size(), [&](std::size_t e) {
    auto env = envs::make_environment(scenario);
    logs[e] = envs::run_episode(*env, policy, derive_seed(seed, e));
  });
  return logs;
}

double freezing_rate(const Policy& policy, const envs::ScenarioSpec& scenario, int trials,
                     std::uint64_t seed, int k, int jobs) {
  const auto logs = rollouts(policy, scenario, trials, seed, jobs);
  int frozen = 0;
  for (const auto& log : logs) frozen += has_freeze_event(log, k) ? 1 : 0;
  return static_cast<double>(frozen) / static_cast<double>(logs.size());
}

BehaviorReport behavior_report(const std::vector<envs::EpisodeLog>& logs, const ActionCatalog& actions,
                               const BehaviorParams& params) {
  BehaviorReport r;
  r.trials = static_cast<int>(logs.size());
  r.seed = params.seed;
  if (logs.empty()) return r;
  const auto osc = oscillation_metrics(logs, actions, params.oscillation);
  r.c_osc_pct = osc.c_osc_pct;
  r.c_osc_delta = osc.c_osc_delta;
  double vb = 0.0;
  std::size_t steps = 0;
  for (const auto& log : logs) {
    r.freezing_rate += has_freeze_event(log, params.freeze_steps) ? 1.0 : 0.0;
    r.success_rate += log.goal_reached ? 1.0 : 0.0;
    r.collision_rate += log.collision ? 1.0 : 0.0;
    r.mean_return += log.total_reward();
    for (double v : vibration_series(log, params.gamma)) vb += v;
    steps += log.length();
  }
  const double n = static_cast<double>(logs.size());
  r.freezing_rate /= n;
  r.success_rate /= n;
  r.collision_rate /= n;
  r.mean_return /= n;
  r.v_b_mean = steps > 0 ? vb / static_cast<double>(steps) : 0.0;
  return r;
}

BehaviorReport behavior_report(const Policy& policy, const envs::ScenarioSpec& scenario,
                               const BehaviorParams& params) {
  const auto logs = rollouts(policy, scenario, params.trials, params.seed, params.jobs);
  return behavior_report(logs, default_actions(), params);
}

json report_to_json(const BehaviorReport& r) {
  return {{"freezing_rate", r.freezing_rate}, {"c_osc_pct", r.c_osc_pct},
          {"c_osc_delta", r.c_osc_delta},     {"v_b_mean", r.v_b_mean},
          {"success_rate", r.success_rate},   {"collision_rate", r.collision_rate},
          {"mean_return", r.mean_return},     {"trials", r.trials},
          {"seed", r.seed}};
}

EfficiencyResult efficiency(double M_1, double M_2, long long N_plus, long long N_1) {
  if (!(M_1 > 0.0)) throw DomainError("efficiency undefined: M_1 must be > 0");
  if (N_plus <= 0) throw DomainError("efficiency undefined: N_plus must be > 0");
  if (N_1 <= 0) throw DomainError("efficiency undefined: N_1 must be > 0");
  if (!std::isfinite(M_2)) throw DomainError("efficiency undefined: M_2 is not finite");
  EfficiencyResult r{M_1, M_2, N_1, N_plus, 0.0, 0.0};
  const double change = std::abs(M_2 - M_1) / M_1;
  r.e_O = change / static_cast<double>(N_plus);
  r.e_R = change / (static_cast<double>(N_plus) / static_cast<double>(N_1));
  return r;
}

json efficiency_to_json(const EfficiencyResult& r) {
  return {{"M_1", r.M_1}, {"M_2", r.M_2}, {"N_1", r.N_1},
          {"N_plus", r.N_plus}, {"e_O", r.e_O}, {"e_R", r.e_R}};
}

}  // namespace msviper::metrics
