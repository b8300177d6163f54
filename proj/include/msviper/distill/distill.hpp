#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "msviper/cart/cart.hpp"
#include "msviper/cart/pairset.hpp"
#include "msviper/core/random.hpp"
#include "msviper/core/tree.hpp"
#include "msviper/envs/env.hpp"
#include "msviper/envs/scenario.hpp"
#include "msviper/expert/expert.hpp"

namespace msviper::distill {

enum class SamplingMode { uniform, loss_weighted };

const char* to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(const std::string& name);

struct DistillConfig {
  int M = 10;     // trajectories per iteration
  int N = 5;      // iterations per scenario
  int l_t = 100;  // trajectory length cap
  int n_s = 2000; // pairs drawn from D per iteration
  int n_cv = 20;  // evaluation trials per scenario
  SamplingMode sampling_mode = SamplingMode::uniform;
  /// Probability of executing the expert's action at iteration i of each
  /// scenario (entry i-1; the last entry repeats). Ignored when pure_expert
  /// is set.
  std::vector<double> beta_schedule{1.0, 0.0};
  bool pure_expert = false;
  std::uint64_t rng_seed = 1;
  cart::CartConfig cart;
  /// Optional per-scenario weights reported instead of the length-based ones.
  std::vector<double> env_weights;
  int jobs = 1;

  double beta(int iteration_index) const;
  void validate() const;
};

nlohmann::json config_to_json(const DistillConfig& cfg);
/// Unknown keys are rejected with ConfigError.
DistillConfig config_from_json(const nlohmann::json& doc);

struct TrajectorySample {
  cart::PairSet pairs;
  /// Executed steps per trajectory, in rollout order.
  std::vector<int> lengths;
  /// Actions actually executed (expert or tree), aligned with `pairs`.
  std::vector<ActionId> executed;
};

/// Rolls out M episodes of at most l_t steps. At each step the executed
/// action is the expert's with probability beta, otherwise `learner`'s
/// (the expert's when learner is null); the label is always the expert's.
/// Trajectory j uses episode seed derive_seed(seed, j).
TrajectorySample sample_trajectories(const expert::ExpertPolicy& expert, const Policy* learner,
                                     const envs::ScenarioSpec& scenario, int M, int l_t,
                                     double beta, std::uint64_t seed, int jobs = 1);

/// Loss of a state for weighted sampling: max_a Q - min_a Q.
double state_loss(const expert::ExpertPolicy& expert, std::span<const double> state);

/// Indices drawn with replacement, proportional to `weights`.
std::vector<std::size_t> weighted_draws(std::span<const double> weights, std::size_t count, Rng& rng);

/// Uniform: min(n_s, |D|) rows without replacement. Loss-weighted: the same
/// number of draws with replacement in proportion to state_loss; repeated
/// rows are merged and carry their draw count as weight. Falls back to
/// uniform when the expert has no Q-values or every loss is zero.
/// Throws EmptyDatasetError for an empty D.
cart::PairSet sample_dataset(const cart::PairSet& D, int n_s, SamplingMode mode,
                             const expert::ExpertPolicy* expert, Rng& rng);

struct EvalResult {
  double mean_reward_per_timestep = 0.0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  int trials = 0;
};

nlohmann::json eval_to_json(const EvalResult& result);

/// `trials` greedy episodes per scenario. Episode t of every scenario uses
/// reset(derive_seed(seed, t)), so all policies see the same starts.
EvalResult evaluate(const Policy& policy, const std::vector<envs::ScenarioSpec>& scenarios,
                    int trials, std::uint64_t seed, int jobs = 1);

struct Candidate {
  DecisionTreePolicy tree;
  int scenario_index = 0;
  int iteration = 0;  // 1-based within its scenario
  EvalResult eval;
};

struct IterationStats {
  int scenario_index = 0;
  int iteration = 0;
  double beta = 1.0;
  std::size_t new_pairs = 0;
  std::size_t dataset_size = 0;
  std::size_t sample_size = 0;
  TreeStats tree;
  double mean_return = 0.0;
};

struct DistillRun {
  cart::PairSet dataset;
  std::vector<Candidate> candidates;
  std::size_t selected = 0;
  std::vector<IterationStats> iterations;
  /// Sampled steps per scenario and the derived scenario weights.
  std::vector<long long> scenario_steps;
  std::vector<double> env_weights;

  const DecisionTreePolicy& selected_tree() const { return candidates.at(selected).tree; }
};

/// Multi-scenario distillation. Candidates are scored on the full scenario
/// list as soon as they are trained; the best so far drives the mixing
/// policy, and the best overall (ties to the earliest) is selected.
/// Throws ConfigError for an empty scenario list.
DistillRun msviper(const expert::ExpertPolicy& expert, const std::vector<envs::ScenarioSpec>& E,
                   const DistillConfig& cfg);

/// Single-scenario baseline: msviper on {scenario}.
DistillRun ssviper(const expert::ExpertPolicy& expert, const envs::ScenarioSpec& scenario,
                   const DistillConfig& cfg);

/// Config for an SSVIPER run spending the same sample budget as an MSVIPER
/// run over `scenario_count` scenarios (N scaled by the count).
DistillConfig equal_budget_config(const DistillConfig& cfg, std::size_t scenario_count);

nlohmann::json run_to_json(const DistillRun& run, const DistillConfig& cfg);

/// States visited by the expert on `scenario`, collected until `count`.
std::vector<StateVector> expert_rollout_states(const expert::ExpertPolicy& expert,
                                               const envs::ScenarioSpec& scenario,
                                               std::size_t count, std::uint64_t seed);

/// Fraction of states where both policies choose the same action.
double fidelity(const Policy& a, const Policy& b, const std::vector<StateVector>& states);

}  // namespace msviper::distill
