#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "msviper/core/errors.hpp"
#include "msviper/distill/distill.hpp"

using namespace msviper;
using namespace msviper::distill;

namespace {

const expert::QTrainingResult& grid_expert() {
  static const auto result = [] {
    expert::QLearningParams p;
    p.seed = 1;
    p.episodes_per_stage = 1500;
    return expert::train_q_expert(envs::default_grid_curriculum(7), p);
  }();
  return result;
}

DistillConfig small_config() {
  DistillConfig cfg;
  cfg.M = 5;
  cfg.N = 2;
  cfg.n_s = 300;
  cfg.n_cv = 5;
  cfg.rng_seed = 4;
  return cfg;
}

cart::PairSet numbered(std::size_t n) {
  cart::PairSet d(48);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(48, 0.0);
    s[0] = static_cast<double>(i);
    d.add(s, static_cast<ActionId>(i % 3));
  }
  return d;
}

}  // namespace

TEST_CASE("beta schedule is indexed per scenario iteration") {
  DistillConfig cfg;
  cfg.beta_schedule = {1.0, 0.5, 0.0};
  CHECK(cfg.beta(0) == 1.0);
  CHECK(cfg.beta(1) == 0.5);
  CHECK(cfg.beta(7) == 0.0);
  cfg.pure_expert = true;
  CHECK(cfg.beta(7) == 1.0);
  cfg.beta_schedule = {1.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("distill config documents reject unknown keys") {
  const auto doc = config_to_json(small_config());
  CHECK(config_to_json(config_from_json(doc)) == doc);
  auto bad = doc;
  bad["samples"] = 3;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  auto bad_cart = doc;
  bad_cart["cart"]["criterion"] = "entropy";
  CHECK_THROWS_AS(config_from_json(bad_cart), ConfigError);
  CHECK(equal_budget_config(small_config(), 3).N == 6);
}

TEST_CASE("uniform sampling draws distinct rows in order") {
  const auto D = numbered(50);
  Rng rng(3);
  const auto sub = sample_dataset(D, 20, SamplingMode::uniform, nullptr, rng);
  REQUIRE(sub.size() == 20);
  CHECK_FALSE(sub.weighted());
  std::set<double> seen;
  double prev = -1.0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    CHECK(sub.feature(i, 0) > prev);
    prev = sub.feature(i, 0);
    seen.insert(prev);
  }
  CHECK(seen.size() == 20);
  Rng rng2(3);
  CHECK(sample_dataset(D, 500, SamplingMode::uniform, nullptr, rng2).size() == 50);
  Rng rng3(3);
  CHECK_THROWS_AS(sample_dataset(cart::PairSet(48), 5, SamplingMode::uniform, nullptr, rng3), EmptyDatasetError);
}

TEST_CASE("weighted draws follow the weights and skip zero rows") {
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0, 0.0};
  Rng rng(9);
  const auto draws = weighted_draws(w, 40000, rng);
  std::map<std::size_t, int> counts;
  for (auto d : draws) counts[d]++;
  CHECK(counts.size() == 2);
  CHECK(static_cast<double>(counts[3]) / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(weighted_draws(zero, 1, rng), ConfigError);
}

TEST_CASE("loss-weighted sampling merges duplicates into weights") {
  const auto& q = grid_expert();
  auto sample = sample_trajectories(*q.expert, nullptr, envs::default_grid_curriculum(7).back(), 10, 40, 1.0, 5);
  Rng rng(2);
  const auto sub = sample_dataset(sample.pairs, 200, SamplingMode::loss_weighted, q.expert.get(), rng);
  CHECK(sub.weighted());
  double total = 0.0;
  for (std::size_t i = 0; i < sub.size(); ++i) total += sub.weight(i);
  CHECK(total == doctest::Approx(std::min<double>(200, sample.pairs.size())));
  // A controller without values falls back to uniform.
  const auto scripted = expert::scripted_expert("potential_field", StateLayout::desk());
  Rng rng2(2);
  CHECK_FALSE(sample_dataset(sample.pairs, 50, SamplingMode::loss_weighted, scripted.get(), rng2).weighted());
}

TEST_CASE("trajectory sampling labels with the expert and mixes by beta") {
  const auto& q = grid_expert();
  const auto scenario = envs::default_grid_curriculum(7).back();
  const auto always_stop = DecisionTreePolicy::single_leaf(StateLayout::desk(), default_actions(), kStopAction);
  const auto sample = sample_trajectories(*q.expert, &always_stop, scenario, 4, 30, 0.0, 8);
  int total = 0;
  for (int len : sample.lengths) total += len;
  CHECK(static_cast<std::size_t>(total) == sample.pairs.size());
  for (std::size_t i = 0; i < sample.pairs.size(); ++i) {
    CHECK(sample.pairs.action(i) == q.expert->act(sample.pairs.state(i)));
    CHECK(sample.executed[i] == kStopAction);
  }
  const auto again = sample_trajectories(*q.expert, &always_stop, scenario, 4, 30, 0.0, 8, 3);
  CHECK(again.pairs == sample.pairs);
}

TEST_CASE("one-scenario msviper equals ssviper and ignores the job count") {
  const auto& q = grid_expert();
  const auto scenario = envs::default_grid_curriculum(7).back();
  auto cfg = small_config();
  const auto a = distill::msviper(*q.expert, {scenario}, cfg);
  const auto b = ssviper(*q.expert, scenario, cfg);
  CHECK(a.selected_tree() == b.selected_tree());
  CHECK(run_to_json(a, cfg) == run_to_json(b, cfg));
  cfg.jobs = 4;
  const auto c = ssviper(*q.expert, scenario, cfg);
  CHECK(c.selected_tree() == a.selected_tree());
  CHECK(c.dataset == a.dataset);
}

TEST_CASE("msviper bookkeeping") {
  const auto& q = grid_expert();
  const auto cur = envs::default_grid_curriculum(7);
  const auto cfg = small_config();
  const auto run = distill::msviper(*q.expert, cur, cfg);
  CHECK(run.candidates.size() == 4);
  CHECK(run.iterations.size() == 4);
  CHECK(run.iterations[0].beta == 1.0);
  CHECK(run.iterations[1].beta == 0.0);
  CHECK(run.iterations[2].beta == 1.0);  // schedule restarts with every scenario
  double best = -1e300;
  for (const auto& c : run.candidates) best = std::max(best, c.eval.mean_return);
  CHECK(run.candidates[run.selected].eval.mean_return == best);
  for (std::size_t i = 0; i < run.selected; ++i) CHECK(run.candidates[i].eval.mean_return < best);
  double wsum = 0.0;
  for (double w : run.env_weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0));
  CHECK(run.dataset.size() == static_cast<std::size_t>(run.scenario_steps[0] + run.scenario_steps[1]));
  CHECK_THROWS_AS(distill::msviper(*q.expert, {}, cfg), ConfigError);
}

TEST_CASE("fidelity of a policy with itself is one") {
  const auto& q = grid_expert();
  const auto states = expert_rollout_states(*q.expert, envs::default_grid_curriculum(7).back(), 500, 3);
  CHECK(states.size() == 500);
  CHECK(fidelity(*q.expert, *q.expert, states) == 1.0);
}
