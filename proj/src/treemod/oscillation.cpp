#include <algorithm>
#include <deque>
#include <string>

#include "msviper/cart/cart.hpp"
#include "msviper/core/errors.hpp"
#include "msviper/core/parallel.hpp"
#include "msviper/core/random.hpp"
#include "msviper/envs/env.hpp"
#include "msviper/treemod/treemod.hpp"

namespace msviper::treemod {

namespace {

void sort_unique(std::vector<StateVector>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void merge_into(std::map<NodeId, std::vector<StateVector>>& dst,
                std::map<NodeId, std::vector<StateVector>>& src) {
  for (auto& [id, states] : src) {
    auto& out = dst[id];
    out.insert(out.end(), std::make_move_iterator(states.begin()), std::make_move_iterator(states.end()));
  }
}

OscillationObservations observe_episode(const DecisionTreePolicy& tree, envs::Environment& env,
                                        std::uint64_t episode_seed, const metrics::OscillationParams& params) {
  OscillationObservations obs;
  struct Entry {
    StateVector state;
    NodeId leaf;
    double angular;
  };
  std::deque<Entry> window;
  std::vector<double> angular;
  StateVector s = env.reset(episode_seed);
  const auto& actions = tree.actions();
  while (!env.done()) {
    const NodeId leaf = tree.leaf_for(s);
    const ActionId a = tree.node(leaf).action;
    window.push_back({s, leaf, actions[static_cast<std::size_t>(a)].angular});
    if (window.size() > static_cast<std::size_t>(params.window)) window.pop_front();
    bool fired = false;
    if (window.size() == static_cast<std::size_t>(params.window)) {
      angular.clear();
      for (const auto& e : window) angular.push_back(e.angular);
      fired = metrics::oscillation_fires(angular, params);
    }
    if (fired) {
      for (const auto& e : window) {
        obs.O_C[e.leaf].push_back(e.state);
        obs.N.push_back(e.leaf);
      }
    } else {
      obs.O_X[leaf].push_back(s);
    }
    s = env.step(a).next_state;
  }
  return obs;
}

}  // namespace

void OscillationObservations::normalize() {
  for (auto& [id, v] : O_C) sort_unique(v);
  for (auto& [id, v] : O_X) sort_unique(v);
  std::sort(N.begin(), N.end());
  N.erase(std::unique(N.begin(), N.end()), N.end());
}

OscillationObservations detect_oscillation(const DecisionTreePolicy& tree, const envs::ScenarioSpec& scenario,
                                           int n_e, const metrics::OscillationParams& params,
                                           std::uint64_t seed, int jobs) {
  params.validate();
  if (params.window < 2) throw ConfigError("oscillation window must be >= 2");
  OscillationObservations merged;
  if (n_e <= 0) return merged;
  std::vector<OscillationObservations> parts(static_cast<std::size_t>(n_e));
  parallel_for(jobs, parts.size(), [&](std::size_t e) {
    auto env = envs::make_environment(scenario, tree.actions());
    parts[e] = observe_episode(tree, *env, derive_seed(seed, e), params);
  });
  for (auto& p : parts) {
    merge_into(merged.O_C, p.O_C);
    merge_into(merged.O_X, p.O_X);
    merged.N.insert(merged.N.end(), p.N.begin(), p.N.end());
  }
  merged.normalize();
  return merged;
}

RepairResult fix_oscillation(const DecisionTreePolicy& tree, const OscillationObservations& obs,
                             bool force_replace, double reduce_scale) {
  RepairResult result{tree, {}};
  RepairLog& log = result.log;
  log.defect = "oscillation";
  log.target_metric = "c_osc_pct";
  log.detected = obs.N;
  log.N_1 = static_cast<long long>(tree.stats().node_count);
  const std::vector<StateVector> none;
  auto lookup = [&](const std::map<NodeId, std::vector<StateVector>>& m, NodeId id) -> const std::vector<StateVector>& {
    auto it = m.find(id);
    return it == m.end() ? none : it->second;
  };

  for (NodeId id : obs.N) {
    if (!tree.has_node(id) || !tree.node(id).is_leaf()) {
      throw LookupError("oscillation repair target " + std::to_string(id) + " is not a leaf");
    }
    const ActionId before = tree.node(id).action;
    const ActionId reduced = reduced_magnitude_action(tree.actions(), before, reduce_scale);
    const auto& oc = lookup(obs.O_C, id);
    const auto& ox = lookup(obs.O_X, id);

    auto replace = [&] {
      if (reduced == before) return;
      result.tree.set_action(id, reduced);
      log.changes.push_back({id, ChangeKind::action_changed, before, reduced});
      ++log.N_plus;
    };

    if (ox.empty() || force_replace || oc.empty()) {
      replace();
      continue;
    }
    // Label 1 marks oscillating states, 0 the rest.
    cart::PairSet pairs(tree.layout().dimension());
    for (const auto& s : oc) pairs.add(s, 1);
    for (const auto& s : ox) pairs.add(s, 0);
    const auto split = cart::best_split(pairs, 1e-12);
    if (!split) {
      log.notes.push_back("node " + std::to_string(id) + ": no separating split, action replaced");
      replace();
      continue;
    }
    double left_c = 0.0, left_n = 0.0, right_c = 0.0, right_n = 0.0;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      const bool left = pairs.feature(r, static_cast<std::size_t>(split->feature)) <= split->threshold;
      const bool c = pairs.action(r) == 1;
      (left ? left_n : right_n) += 1.0;
      (left ? left_c : right_c) += c ? 1.0 : 0.0;
    }
    const double left_frac = left_n > 0 ? left_c / left_n : 0.0;
    const double right_frac = right_n > 0 ? right_c / right_n : 0.0;
    const bool c_left = left_frac >= right_frac;
    const auto [l, r] = result.tree.split_leaf(id, split->feature, split->threshold, c_left ? reduced : before,
                                               c_left ? before : reduced);
    log.changes.push_back({id, ChangeKind::node_split_added, nlohmann::json{{"action", before}},
                           nlohmann::json{{"feature", split->feature},
                                          {"threshold", split->threshold},
                                          {"left", l},
                                          {"right", r},
                                          {"oscillating_child", c_left ? l : r},
                                          {"reduced_action", reduced}}});
    log.N_plus += 3;
  }
  return result;
}

}  // namespace msviper::treemod
