#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "msviper/core/actions.hpp"
#include "msviper/core/layout.hpp"
#include "msviper/core/policy.hpp"
#include "msviper/envs/scenario.hpp"

namespace msviper::expert {

/// Black-box policy being imitated. Q-values are optional.
class ExpertPolicy : public Policy {
 public:
  virtual bool has_q_values() const { return false; }
  /// One value per catalog action. Throws LookupError when unavailable.
  virtual std::vector<double> q_values(std::span<const double> state) const;
  virtual std::string kind() const = 0;
  /// Parameters recorded in the expert manifest.
  virtual nlohmann::json params_json() const = 0;
  virtual const StateLayout& layout() const = 0;
};

/// Bucket of the tabular expert: goal-bearing octant (0 = dead ahead,
/// counting counter-clockwise), goal-distance bin and a bitmask of occupied
/// nearest-row cells. Every bucket boundary is a threshold on one state
/// feature, so the greedy policy is exactly representable by a tree.
struct BucketKey {
  int octant = 0;
  int range_bin = 0;
  int near_mask = 0;

  friend auto operator<=>(const BucketKey&, const BucketKey&) = default;
};

BucketKey discretize(const StateLayout& layout, std::span<const double> state);

/// Sparse table; unseen buckets read as zero.
class QTable {
 public:
  explicit QTable(std::size_t action_count = 0) : action_count_(action_count) {}

  std::size_t action_count() const { return action_count_; }
  double get(const BucketKey& key, ActionId action) const;
  void set(const BucketKey& key, ActionId action, double value);
  /// All values of a bucket (zeros when unseen).
  std::vector<double> row(const BucketKey& key) const;
  std::size_t bucket_count() const { return table_.size(); }
  const std::map<BucketKey, std::vector<double>>& buckets() const { return table_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t action_count_;
  std::map<BucketKey, std::vector<double>> table_;
};

/// Distance-bin edges of the bucket key.
inline constexpr double kRangeBinEdges[] = {1.5, 3.0};

/// Text form: one "octant range_bin mask action value" line per stored entry, sorted.
std::string serialize_qtable(const QTable& table);
QTable parse_qtable(const std::string& text, std::size_t action_count);

struct QLearningParams {
  double alpha = 0.2;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int episodes_per_stage = 2000;
  /// Step cap per training episode; < 0 uses the scenario horizon.
  int max_steps = -1;
  std::uint64_t seed = 1;
  std::vector<ActionId> allowed_actions{0, 1, 2, 3, 4, 5};

  void validate(const ActionCatalog& actions) const;
};

nlohmann::json qparams_to_json(const QLearningParams& params);
QLearningParams qparams_from_json(const nlohmann::json& doc);

/// Greedy policy over a QTable restricted to the allowed actions.
class QExpert final : public ExpertPolicy {
 public:
  QExpert(StateLayout layout, ActionCatalog actions, QTable table, QLearningParams params);

  ActionId act(std::span<const double> state) const override;
  bool has_q_values() const override { return true; }
  /// Disallowed actions report the smallest allowed value, so the greedy
  /// action is always among the maximizers.
  std::vector<double> q_values(std::span<const double> state) const override;
  std::string kind() const override { return "q_table"; }
  nlohmann::json params_json() const override;

  const QTable& table() const { return table_; }
  const StateLayout& layout() const override { return layout_; }
  const QLearningParams& params() const { return params_; }

 private:
  StateLayout layout_;
  ActionCatalog actions_;
  QTable table_;
  QLearningParams params_;
};

struct QTrainingResult {
  std::shared_ptr<QExpert> expert;
  /// Table at the start and end of each curriculum stage.
  std::vector<QTable> stage_initial;
  std::vector<QTable> stage_final;
  /// Greedy-free training return of every episode, in order.
  std::vector<double> episode_returns;
};

/// Epsilon-greedy Q-learning, stage by stage, carrying the table forward.
/// Throws ConfigError for an empty or inconsistent curriculum and
/// TrainingError when values stop being finite.
QTrainingResult train_q_expert(const std::vector<envs::ScenarioSpec>& curriculum,
                               const QLearningParams& params,
                               const ActionCatalog& actions = default_actions());

struct ScriptedParams {
  /// Nearest-row occupancy above this makes freezing_flawed stop.
  double freeze_threshold = 0.3;
  /// Bearing band (radians) inside which no turn is commanded.
  double deadband = 0.2;
  /// Obstacle repulsion gain of the potential field.
  double repulsion = 0.8;
  /// terrain_speedy slows down only once the state's V_b exceeds this.
  double vb_slow = 0.35;
  double gamma = 0.9;

  friend bool operator==(const ScriptedParams&, const ScriptedParams&) = default;
};

nlohmann::json scripted_params_to_json(const ScriptedParams& params);
ScriptedParams scripted_params_from_json(const nlohmann::json& doc);

inline const std::vector<std::string>& scripted_kinds() {
  static const std::vector<std::string> kinds{"potential_field", "freezing_flawed",
                                              "oscillating_flawed", "terrain_speedy"};
  return kinds;
}

/// Throws ConfigError for an unknown kind.
std::shared_ptr<ExpertPolicy> scripted_expert(const std::string& kind, const StateLayout& layout,
                                              const ScriptedParams& params = {},
                                              const ActionCatalog& actions = default_actions());

/// Catalog id with exactly these velocities; throws LookupError.
ActionId find_action(const ActionCatalog& actions, double linear, double angular);

/// Manifest: {"kind", "params", "layout"} plus, for Q-table experts, "seed"
/// and "table" (a file name relative to the manifest, written alongside).
void save_expert(const ExpertPolicy& expert, const std::filesystem::path& manifest_path,
                 const std::string& table_file = "qtable.txt");
/// Throws InputError when files are missing or malformed.
std::shared_ptr<ExpertPolicy> load_expert(const std::filesystem::path& manifest_path);

}  // namespace msviper::expert
