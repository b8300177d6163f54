#include <algorithm>
#include <string>

#include "msviper/core/errors.hpp"
#include "msviper/core/parallel.hpp"
#include "msviper/distill/distill.hpp"

namespace msviper::distill {

using nlohmann::json;

namespace {

constexpr std::uint64_t kEvalStream = 0xE7A1;
constexpr std::uint64_t kSampleStream = 0x5A11;

}  // namespace

const char* to_string(SamplingMode mode) {
  return mode == SamplingMode::uniform ? "uniform" : "loss_weighted";
}

SamplingMode sampling_mode_from_string(const std::string& name) {
  if (name == "uniform") return SamplingMode::uniform;
  if (name == "loss_weighted") return SamplingMode::loss_weighted;
  throw ConfigError("unknown sampling_mode '" + name + "'");
}

double DistillConfig::beta(int iteration_index) const {
  if (pure_expert || beta_schedule.empty()) return 1.0;
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(iteration_index), beta_schedule.size() - 1);
  return beta_schedule[k];
}

void DistillConfig::validate() const {
  if (M < 1 || N < 1 || l_t < 1 || n_s < 1 || n_cv < 1) {
    throw ConfigError("M, N, l_t, n_s and n_cv must all be >= 1");
  }
  for (double b : beta_schedule) {
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("beta_schedule entries must lie in [0, 1]");
  }
  for (double w : env_weights) {
    if (!(w >= 0.0)) throw ConfigError("env_weights must be nonnegative");
  }
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  cart.validate();
}

json config_to_json(const DistillConfig& cfg) {
  json c{{"min_samples_split", cfg.cart.min_samples_split},
         {"min_impurity_decrease", cfg.cart.min_impurity_decrease},
         {"seed", cfg.cart.rng_seed}};
  c["max_depth"] = cfg.cart.max_depth ? json(*cfg.cart.max_depth) : json(nullptr);
  c["max_features"] = cfg.cart.max_features ? json(*cfg.cart.max_features) : json(nullptr);
  return {{"M", cfg.M},
          {"N", cfg.N},
          {"l_t", cfg.l_t},
          {"n_s", cfg.n_s},
          {"n_cv", cfg.n_cv},
          {"sampling_mode", to_string(cfg.sampling_mode)},
          {"beta_schedule", cfg.beta_schedule},
          {"pure_expert", cfg.pure_expert},
          {"seed", cfg.rng_seed},
          {"cart", c},
          {"env_weights", cfg.env_weights},
          {"jobs", cfg.jobs}};
}

DistillConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("distill config must be an object");
  DistillConfig cfg;
  for (const auto& [k, v] : doc.items()) {
    try {
      if (k == "M") cfg.M = v.get<int>();
      else if (k == "N") cfg.N = v.get<int>();
      else if (k == "l_t") cfg.l_t = v.get<int>();
      else if (k == "n_s") cfg.n_s = v.get<int>();
      else if (k == "n_cv") cfg.n_cv = v.get<int>();
      else if (k == "sampling_mode") cfg.sampling_mode = sampling_mode_from_string(v.get<std::string>());
      else if (k == "beta_schedule") cfg.beta_schedule = v.get<std::vector<double>>();
      else if (k == "pure_expert") cfg.pure_expert = v.get<bool>();
      else if (k == "seed") cfg.rng_seed = v.get<std::uint64_t>();
      else if (k == "env_weights") cfg.env_weights = v.get<std::vector<double>>();
      else if (k == "jobs") cfg.jobs = v.get<int>();
      else if (k == "cart") {
        if (!v.is_object()) throw ConfigError("cart must be an object");
        for (const auto& [ck, cv] : v.items()) {
          if (ck == "max_depth") cfg.cart.max_depth = cv.is_null() ? std::nullopt : std::optional<int>(cv.get<int>());
          else if (ck == "max_features") cfg.cart.max_features = cv.is_null() ? std::nullopt : std::optional<int>(cv.get<int>());
          else if (ck == "min_samples_split") cfg.cart.min_samples_split = cv.get<int>();
          else if (ck == "min_impurity_decrease") cfg.cart.min_impurity_decrease = cv.get<double>();
          else if (ck == "seed") cfg.cart.rng_seed = cv.get<std::uint64_t>();
          else throw ConfigError("unknown cart key '" + ck + "'");
        }
      } else {
        throw ConfigError("unknown distill key '" + k + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + k + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

json eval_to_json(const EvalResult& r) {
  return {{"mean_reward_per_timestep", r.mean_reward_per_timestep},
          {"mean_return", r.mean_return},
          {"success_rate", r.success_rate},
          {"collision_rate", r.collision_rate},
          {"trials", r.trials}};
}

EvalResult evaluate(const Policy& policy, const std::vector<envs::ScenarioSpec>& scenarios,
                    int trials, std::uint64_t seed, int jobs) {
  if (trials < 1) throw ConfigError("evaluation needs at least one trial");
  struct Outcome {
    double reward = 0.0;
    std::size_t steps = 0;
    bool success = false;
    bool collision = false;
  };
  const std::size_t per = static_cast<std::size_t>(trials);
  std::vector<Outcome> outcomes(scenarios.size() * per);
  parallel_for(jobs, outcomes.size(), [&](std::size_t i) {
    auto env = envs::make_environment(scenarios[i / per]);
    const auto log = envs::run_episode(*env, policy, derive_seed(seed, i % per));
    outcomes[i] = {log.total_reward(), log.length(), log.goal_reached, log.collision};
  });
  EvalResult r;
  r.trials = static_cast<int>(outcomes.size());
  double reward = 0.0;
  std::size_t steps = 0;
  for (const auto& o : outcomes) {
    reward += o.reward;
    steps += o.steps;
    r.success_rate += o.success ? 1.0 : 0.0;
    r.collision_rate += o.collision ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(outcomes.size());
  r.mean_return = reward / n;
  r.mean_reward_per_timestep = steps > 0 ? reward / static_cast<double>(steps) : 0.0;
  r.success_rate /= n;
  r.collision_rate /= n;
  return r;
}

DistillRun msviper(const expert::ExpertPolicy& expert, const std::vector<envs::ScenarioSpec>& E,
                   const DistillConfig& cfg) {
  if (E.empty()) throw ConfigError("msviper needs at least one scenario");
  cfg.validate();
  for (const auto& e : E) e.validate();
  const StateLayout layout = envs::layout_for(E.front());
  for (const auto& e : E) {
    if (envs::layout_for(e) != layout) throw ConfigError("scenarios disagree on the state layout");
  }
  if (expert.layout() != layout) throw ConfigError("expert layout does not match the scenarios");
  const ActionCatalog actions = default_actions();
  const std::uint64_t eval_seed = derive_seed(cfg.rng_seed, kEvalStream);

  DistillRun run;
  run.dataset = cart::PairSet(layout.dimension());
  run.scenario_steps.assign(E.size(), 0);
  std::optional<std::size_t> best;
  int k = 0;
  for (std::size_t e = 0; e < E.size(); ++e) {
    for (int i = 1; i <= cfg.N; ++i, ++k) {
      const double beta = cfg.beta(i - 1);
      const Policy* learner = best ? &run.candidates[*best].tree : nullptr;
      auto sample = sample_trajectories(expert, learner, E[e], cfg.M, cfg.l_t, beta,
                                        derive_seed(cfg.rng_seed, 1 + static_cast<std::uint64_t>(k)),
                                        cfg.jobs);
      for (int len : sample.lengths) run.scenario_steps[e] += len;
      run.dataset.append(sample.pairs);

      Rng rng(derive_seed(cfg.rng_seed, kSampleStream + static_cast<std::uint64_t>(k)));
      const auto Dprime = sample_dataset(run.dataset, cfg.n_s, cfg.sampling_mode, &expert, rng);
      Candidate c{cart::train(Dprime, cfg.cart, layout, actions), static_cast<int>(e), i, {}};
      c.eval = evaluate(c.tree, E, cfg.n_cv, eval_seed, cfg.jobs);

      IterationStats st;
      st.scenario_index = static_cast<int>(e);
      st.iteration = i;
      st.beta = beta;
      st.new_pairs = sample.pairs.size();
      st.dataset_size = run.dataset.size();
      st.sample_size = Dprime.size();
      st.tree = c.tree.stats();
      st.mean_return = c.eval.mean_return;
      run.iterations.push_back(st);

      run.candidates.push_back(std::move(c));
      const std::size_t idx = run.candidates.size() - 1;
      if (!best || run.candidates[idx].eval.mean_return > run.candidates[*best].eval.mean_return) {
        best = idx;
      }
    }
  }
  run.selected = *best;

  const bool override_weights = cfg.env_weights.size() == E.size();
  double total = 0.0;
  for (std::size_t e = 0; e < E.size(); ++e) {
    total += override_weights ? cfg.env_weights[e] : static_cast<double>(run.scenario_steps[e]);
  }
  for (std::size_t e = 0; e < E.size(); ++e) {
    const double v = override_weights ? cfg.env_weights[e] : static_cast<double>(run.scenario_steps[e]);
    run.env_weights.push_back(total > 0.0 ? v / total : 0.0);
  }
  return run;
}

DistillRun ssviper(const expert::ExpertPolicy& expert, const envs::ScenarioSpec& scenario,
                   const DistillConfig& cfg) {
  return msviper(expert, {scenario}, cfg);
}

DistillConfig equal_budget_config(const DistillConfig& cfg, std::size_t scenario_count) {
  DistillConfig out = cfg;
  out.N = cfg.N * static_cast<int>(std::max<std::size_t>(1, scenario_count));
  return out;
}

json run_to_json(const DistillRun& run, const DistillConfig& cfg) {
  json iterations = json::array();
  for (const auto& st : run.iterations) {
    iterations.push_back({{"scenario", st.scenario_index},
                          {"iteration", st.iteration},
                          {"beta", st.beta},
                          {"new_pairs", st.new_pairs},
                          {"dataset_size", st.dataset_size},
                          {"sample_size", st.sample_size},
                          {"node_count", st.tree.node_count},
                          {"leaf_count", st.tree.leaf_count},
                          {"depth", st.tree.depth},
                          {"mean_return", st.mean_return}});
  }
  json candidates = json::array();
  for (const auto& c : run.candidates) {
    candidates.push_back({{"scenario", c.scenario_index},
                          {"iteration", c.iteration},
                          {"node_count", c.tree.stats().node_count},
                          {"eval", eval_to_json(c.eval)}});
  }
  return {{"config", config_to_json(cfg)},
          {"iterations", iterations},
          {"candidates", candidates},
          {"selected", run.selected},
          {"dataset_size", run.dataset.size()},
          {"scenario_steps", run.scenario_steps},
          {"env_weights", run.env_weights}};
}

std::vector<StateVector> expert_rollout_states(const expert::ExpertPolicy& expert,
                                               const envs::ScenarioSpec& scenario,
                                               std::size_t count, std::uint64_t seed) {
  auto env = envs::make_environment(scenario);
  std::vector<StateVector> states;
  for (std::uint64_t ep = 0; states.size() < count; ++ep) {
    const auto log = envs::run_episode(*env, expert, derive_seed(seed, ep));
    for (const auto& s : log.states) {
      if (states.size() < count) states.push_back(s);
    }
    if (ep > 100 * count) throw ConfigError("expert rollouts produce no states");
  }
  return states;
}

double fidelity(const Policy& a, const Policy& b, const std::vector<StateVector>& states) {
  if (states.empty()) return 0.0;
  std::size_t same = 0;
  for (const auto& s : states) same += a.act(s) == b.act(s) ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(states.size());
}

}  // namespace msviper::distill
