#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "msviper/core/errors.hpp"
#include "msviper/core/random.hpp"
#include "msviper/core/tree_io.hpp"
#include "msviper/envs/env.hpp"
#include "msviper/expert/expert.hpp"

namespace msviper::expert {

using nlohmann::json;

std::vector<double> ExpertPolicy::q_values(std::span<const double>) const {
  throw LookupError("expert '" + kind() + "' exposes no Q-values");
}

namespace {

/// Highest-valued allowed action; ties go to the lower id.
ActionId greedy_action(const std::vector<double>& row, const std::vector<ActionId>& allowed) {
  ActionId best = -1;
  for (ActionId a : allowed) {
    const double v = row[static_cast<std::size_t>(a)];
    if (best < 0 || v > row[static_cast<std::size_t>(best)] ||
        (v == row[static_cast<std::size_t>(best)] && a < best)) {
      best = a;
    }
  }
  return best;
}

}  // namespace

BucketKey discretize(const StateLayout& layout, std::span<const double> state) {
  layout.check_state(state);
  const double d = state[layout.goal_distance_index()];
  const double b = state[layout.goal_bearing_index()];
  BucketKey key;
  const double sector = std::numbers::pi / 4.0;
  const int raw = static_cast<int>(std::floor((b + sector / 2.0) / sector));
  key.octant = ((raw % 8) + 8) % 8;
  for (double edge : kRangeBinEdges) key.range_bin += d >= edge ? 1 : 0;
  for (int c = 0; c < layout.occupancy_columns; ++c) {
    if (state[layout.occupancy_index(0, 0, c)] > 0.5) key.near_mask |= 1 << c;
  }
  return key;
}

double QTable::get(const BucketKey& key, ActionId action) const {
  const auto it = table_.find(key);
  if (it == table_.end()) return 0.0;
  return it->second.at(static_cast<std::size_t>(action));
}

void QTable::set(const BucketKey& key, ActionId action, double value) {
  auto [it, inserted] = table_.try_emplace(key, std::vector<double>(action_count_, 0.0));
  it->second.at(static_cast<std::size_t>(action)) = value;
}

std::vector<double> QTable::row(const BucketKey& key) const {
  const auto it = table_.find(key);
  if (it == table_.end()) return std::vector<double>(action_count_, 0.0);
  return it->second;
}

std::string serialize_qtable(const QTable& table) {
  std::ostringstream out;
  for (const auto& [key, values] : table.buckets()) {
    for (std::size_t a = 0; a < values.size(); ++a) {
      out << key.octant << ' ' << key.range_bin << ' ' << key.near_mask << ' ' << a << ' '
          << format_double(values[a]) << '\n';
    }
  }
  return out.str();
}

QTable parse_qtable(const std::string& text, std::size_t action_count) {
  QTable table(action_count);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    BucketKey key;
    long action = -1;
    std::string value;
    std::string rest;
    if (!(fields >> key.octant >> key.range_bin >> key.near_mask >> action >> value) ||
        (fields >> rest) || action < 0 || static_cast<std::size_t>(action) >= action_count) {
      throw InputError("malformed Q-table line " + std::to_string(line_no));
    }
    table.set(key, static_cast<ActionId>(action), parse_double(value));
  }
  return table;
}

void QLearningParams::validate(const ActionCatalog& actions) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("epsilon schedule must lie in [0, 1]");
  }
  if (episodes_per_stage < 1) throw ConfigError("episodes_per_stage must be >= 1");
  if (allowed_actions.empty()) throw ConfigError("allowed_actions is empty");
  std::set<ActionId> seen;
  for (ActionId a : allowed_actions) {
    if (!contains_action(actions, a)) throw ConfigError("allowed action " + std::to_string(a) + " not in catalog");
    if (!seen.insert(a).second) throw ConfigError("allowed action listed twice");
  }
}

json qparams_to_json(const QLearningParams& p) {
  return {{"alpha", p.alpha},
          {"gamma", p.gamma},
          {"epsilon_start", p.epsilon_start},
          {"epsilon_end", p.epsilon_end},
          {"episodes_per_stage", p.episodes_per_stage},
          {"max_steps", p.max_steps},
          {"seed", p.seed},
          {"allowed_actions", p.allowed_actions}};
}

QLearningParams qparams_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("Q-learning parameters must be an object");
  QLearningParams p;
  for (const auto& [k, v] : doc.items()) {
    try {
      if (k == "alpha") p.alpha = v.get<double>();
      else if (k == "gamma") p.gamma = v.get<double>();
      else if (k == "epsilon_start") p.epsilon_start = v.get<double>();
      else if (k == "epsilon_end") p.epsilon_end = v.get<double>();
      else if (k == "episodes_per_stage") p.episodes_per_stage = v.get<int>();
      else if (k == "max_steps") p.max_steps = v.get<int>();
      else if (k == "seed") p.seed = v.get<std::uint64_t>();
      else if (k == "allowed_actions") p.allowed_actions = v.get<std::vector<ActionId>>();
      else throw ConfigError("unknown Q-learning key '" + k + "'");
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + k + "': " + e.what());
    }
  }
  return p;
}

QExpert::QExpert(StateLayout layout, ActionCatalog actions, QTable table, QLearningParams params)
    : layout_(std::move(layout)),
      actions_(std::move(actions)),
      table_(std::move(table)),
      params_(std::move(params)) {
  params_.validate(actions_);
  if (table_.action_count() != actions_.size()) {
    throw ConfigError("Q-table width does not match the action catalog");
  }
}

ActionId QExpert::act(std::span<const double> state) const {
  return greedy_action(table_.row(discretize(layout_, state)), params_.allowed_actions);
}

std::vector<double> QExpert::q_values(std::span<const double> state) const {
  auto row = table_.row(discretize(layout_, state));
  double lowest = std::numeric_limits<double>::infinity();
  std::vector<char> allowed(row.size(), 0);
  for (ActionId a : params_.allowed_actions) {
    allowed[static_cast<std::size_t>(a)] = 1;
    lowest = std::min(lowest, row[static_cast<std::size_t>(a)]);
  }
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (!allowed[a]) row[a] = lowest;
  }
  return row;
}

json QExpert::params_json() const { return qparams_to_json(params_); }

QTrainingResult train_q_expert(const std::vector<envs::ScenarioSpec>& curriculum,
                               const QLearningParams& params, const ActionCatalog& actions) {
  envs::validate_curriculum(curriculum);
  params.validate(actions);
  const StateLayout layout = envs::layout_for(curriculum.front());
  QTable table(actions.size());
  QTrainingResult result;
  Rng rng(derive_seed(params.seed, 0xE1));

  for (std::size_t stage = 0; stage < curriculum.size(); ++stage) {
    auto env = envs::make_environment(curriculum[stage], actions);
    result.stage_initial.push_back(table);
    const int steps = params.max_steps < 0 ? curriculum[stage].horizon : params.max_steps;
    const int episodes = params.episodes_per_stage;
    for (int ep = 0; ep < episodes; ++ep) {
      const double frac = episodes > 1 ? static_cast<double>(ep) / (episodes - 1) : 1.0;
      const double eps = params.epsilon_start + (params.epsilon_end - params.epsilon_start) * frac;
      StateVector s = env->reset(derive_seed(params.seed, (stage << 32) + static_cast<std::uint64_t>(ep)));
      double ret = 0.0;
      for (int t = 0; t < steps && !env->done(); ++t) {
        const BucketKey key = discretize(layout, s);
        ActionId a;
        if (rng.uniform() < eps) {
          a = params.allowed_actions[rng.below(params.allowed_actions.size())];
        } else {
          a = greedy_action(table.row(key), params.allowed_actions);
        }
        auto out = env->step(a);
        ret += out.reward;
        double target = out.reward;
        if (!out.done) {
          const auto next = table.row(discretize(layout, out.next_state));
          double best = -std::numeric_limits<double>::infinity();
          for (ActionId c : params.allowed_actions) best = std::max(best, next[static_cast<std::size_t>(c)]);
          target += params.gamma * best;
        }
        const double q = table.get(key, a);
        const double updated = q + params.alpha * (target - q);
        if (!std::isfinite(updated)) {
          throw TrainingError("Q-learning produced a non-finite value in stage " + std::to_string(stage));
        }
        table.set(key, a, updated);
        s = std::move(out.next_state);
      }
      result.episode_returns.push_back(ret);
    }
    result.stage_final.push_back(table);
  }
  result.expert = std::make_shared<QExpert>(layout, actions, table, params);
  return result;
}

}  // namespace msviper::expert
