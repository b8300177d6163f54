#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "msviper/cart/pairset.hpp"
#include "msviper/core/actions.hpp"
#include "msviper/core/policy.hpp"
#include "msviper/envs/env.hpp"

namespace msviper::metrics {

// ---- vibration ----------------------------------------------------------

inline constexpr std::size_t kVibrationHistory = 4;

/// Discounted 4-step vibration. `history` is ordered oldest first
/// (t-3 .. t); entry t-k is weighted by gamma^k. Throws ArityError unless
/// exactly four entries are given.
double vibration_vb(std::span<const envs::TerrainSignals> history, double gamma);

/// Same quantity read from the angular-velocity group of a state vector.
double vibration_vb_from_state(const StateLayout& layout, std::span<const double> state, double gamma);

/// V_b after every step of an episode (signals before the start count as 0).
std::vector<double> vibration_series(const envs::EpisodeLog& log, double gamma);

// ---- oscillation --------------------------------------------------------

/// Window predicate: the last `window` commanded angular velocities change
/// sign (strictly, from nonzero to opposite nonzero) at least
/// `min_alternations` times.
struct OscillationParams {
  int window = 6;
  int min_alternations = 4;

  void validate() const;
};

int sign_alternations(std::span<const double> angular);
bool oscillation_fires(std::span<const double> angular_window, const OscillationParams& params);

struct OscillationMetrics {
  double c_osc_pct = 0.0;    // fraction of steps inside a firing window
  double c_osc_delta = 0.0;  // mean |w_t - w_{t-1}|
  std::size_t steps = 0;
  std::size_t differences = 0;
};

/// Metrics of one angular-velocity sequence.
OscillationMetrics oscillation_metrics(std::span<const double> angular, const OscillationParams& params);
/// Step-weighted aggregate over episodes (windows never span two episodes).
OscillationMetrics oscillation_metrics(const std::vector<envs::EpisodeLog>& logs,
                                       const ActionCatalog& actions, const OscillationParams& params);

std::vector<double> angular_sequence(const envs::EpisodeLog& log, const ActionCatalog& actions);

// ---- freezing -----------------------------------------------------------

inline constexpr int kDefaultFreezeSteps = 10;

/// True when the episode has `k` consecutive zero-velocity steps away from the goal.
bool has_freeze_event(const envs::EpisodeLog& log, int k = kDefaultFreezeSteps);

/// Episode e uses reset(derive_seed(seed, e)).
std::vector<envs::EpisodeLog> rollouts(const Policy& policy, const envs::ScenarioSpec& scenario,
                                       int trials, std::uint64_t seed, int jobs = 1);

double freezing_rate(const Policy& policy, const envs::ScenarioSpec& scenario, int trials,
                     std::uint64_t seed, int k = kDefaultFreezeSteps, int jobs = 1);

// ---- behaviour report ---------------------------------------------------

struct BehaviorParams {
  int trials = 100;
  std::uint64_t seed = 1;
  int freeze_steps = kDefaultFreezeSteps;
  double gamma = 0.9;
  OscillationParams oscillation;
  int jobs = 1;
};

struct BehaviorReport {
  double freezing_rate = 0.0;
  double c_osc_pct = 0.0;
  double c_osc_delta = 0.0;
  double v_b_mean = 0.0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double mean_return = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

BehaviorReport behavior_report(const std::vector<envs::EpisodeLog>& logs, const ActionCatalog& actions,
                               const BehaviorParams& params);
BehaviorReport behavior_report(const Policy& policy, const envs::ScenarioSpec& scenario,
                               const BehaviorParams& params);
nlohmann::json report_to_json(const BehaviorReport& report);

// ---- efficiency ---------------------------------------------------------

struct EfficiencyResult {
  double M_1 = 0.0;
  double M_2 = 0.0;
  long long N_1 = 0;
  long long N_plus = 0;
  double e_O = 0.0;
  double e_R = 0.0;
};

/// e_O = (|M_2 - M_1| / M_1) / N_plus, e_R = (|M_2 - M_1| / M_1) / (N_plus / N_1).
/// Throws DomainError naming the field when M_1, N_plus or N_1 is not positive.
EfficiencyResult efficiency(double M_1, double M_2, long long N_plus, long long N_1);
nlohmann::json efficiency_to_json(const EfficiencyResult& result);

// ---- coverage -----------------------------------------------------------

enum class CoverageMethod { viper, msviper };

struct CoverageParams {
  int K = 1;
  int m = 1;
  int n_E = 1;
  /// p[k][e]: chance that one trajectory in environment e hits critical
  /// state k. The last environment is the final one.
  std::vector<std::vector<double>> p;
  double epsilon = 1.0;

  /// Throws ConfigError; msviper additionally needs n_E | m.
  void validate(CoverageMethod method) const;
};

/// Per-state probabilities of being covered at least once.
std::vector<double> coverage_hit_probabilities(const CoverageParams& params, CoverageMethod method);

/// P(count = j), j = 0..n, for independent Bernoulli(probs[i]).
std::vector<double> poisson_binomial(std::span<const double> probs);

/// Smallest covered count that reaches fraction epsilon of K.
int coverage_threshold(int K, double epsilon);

/// Exact P(covered fraction >= epsilon).
double coverage_probability(const CoverageParams& params, CoverageMethod method);

CoverageParams coverage_params_from_json(const nlohmann::json& doc);

/// Fraction of critical states with some pair of D within `tolerance`
/// (per feature, inclusive) of them.
double empirical_critical_coverage(const cart::PairSet& D, const std::vector<StateVector>& critical,
                                   double tolerance = 0.0);

}  // namespace msviper::metrics
