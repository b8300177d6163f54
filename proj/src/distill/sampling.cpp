#include <algorithm>
#include <numeric>

#include "msviper/core/errors.hpp"
#include "msviper/core/parallel.hpp"
#include "msviper/distill/distill.hpp"

namespace msviper::distill {

TrajectorySample sample_trajectories(const expert::ExpertPolicy& expert, const Policy* learner,
                                     const envs::ScenarioSpec& scenario, int M, int l_t,
                                     double beta, std::uint64_t seed, int jobs) {
  struct Rollout {
    std::vector<StateVector> states;
    std::vector<ActionId> labels;
    std::vector<ActionId> executed;
  };
  std::vector<Rollout> rollouts(static_cast<std::size_t>(std::max(0, M)));
  parallel_for(jobs, rollouts.size(), [&](std::size_t j) {
    auto env = envs::make_environment(scenario);
    const std::uint64_t episode = derive_seed(seed, j);
    Rng mix(derive_seed(episode, 0xBE7A));
    Rollout& out = rollouts[j];
    StateVector s = env->reset(episode);
    for (int t = 0; t < l_t && !env->done(); ++t) {
      const ActionId label = expert.act(s);
      const bool use_expert = mix.uniform() < beta || learner == nullptr;
      const ActionId a = use_expert ? label : learner->act(s);
      auto step = env->step(a);
      out.states.push_back(std::move(s));
      out.labels.push_back(label);
      out.executed.push_back(a);
      s = std::move(step.next_state);
    }
  });

  const auto dim = envs::layout_for(scenario).dimension();
  TrajectorySample sample{cart::PairSet(dim), {}, {}};
  for (const auto& r : rollouts) {
    for (std::size_t t = 0; t < r.states.size(); ++t) sample.pairs.add(r.states[t], r.labels[t]);
    sample.lengths.push_back(static_cast<int>(r.states.size()));
    sample.executed.insert(sample.executed.end(), r.executed.begin(), r.executed.end());
  }
  return sample;
}

double state_loss(const expert::ExpertPolicy& expert, std::span<const double> state) {
  const auto q = expert.q_values(state);
  const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
  return *hi - *lo;
}

std::vector<std::size_t> weighted_draws(std::span<const double> weights, std::size_t count, Rng& rng) {
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw ConfigError("sampling weights must be nonnegative");
    total += weights[i];
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw ConfigError("sampling weights sum to zero");
  std::vector<std::size_t> draws;
  draws.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = rng.uniform() * total;
    // upper_bound lands on a row whose cumulative sum strictly increased,
    // so zero-weight rows are never drawn.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    if (it == cumulative.end()) {
      idx = weights.size() - 1;
      while (weights[idx] == 0.0) --idx;
    }
    draws.push_back(idx);
  }
  return draws;
}

namespace {

cart::PairSet uniform_subset(const cart::PairSet& D, std::size_t count, Rng& rng) {
  if (count >= D.size()) return D;
  std::vector<std::size_t> idx(D.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < count; ++k) {
    std::swap(idx[k], idx[k + rng.below(D.size() - k)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return D.subset(idx);
}

}  // namespace

cart::PairSet sample_dataset(const cart::PairSet& D, int n_s, SamplingMode mode,
                             const expert::ExpertPolicy* expert, Rng& rng) {
  if (D.empty()) throw EmptyDatasetError("cannot sample from an empty dataset");
  if (n_s < 1) throw ConfigError("n_s must be >= 1");
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(n_s), D.size());
  if (mode == SamplingMode::uniform || expert == nullptr || !expert->has_q_values()) {
    return uniform_subset(D, count, rng);
  }
  std::vector<double> losses(D.size());
  double total = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i) {
    losses[i] = state_loss(*expert, D.state(i));
    total += losses[i];
  }
  if (!(total > 0.0)) return uniform_subset(D, count, rng);

  std::vector<double> hits(D.size(), 0.0);
  for (std::size_t i : weighted_draws(losses, count, rng)) hits[i] += 1.0;
  cart::PairSet out(D.dimension());
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (hits[i] > 0.0) out.add(D.state(i), D.action(i), hits[i] * D.weight(i));
  }
  return out;
}

}  // namespace msviper::distill
