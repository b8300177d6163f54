#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "msviper/core/tree.hpp"
#include "msviper/envs/scenario.hpp"
#include "msviper/metrics/metrics.hpp"

namespace msviper::treemod {

enum class ChangeKind { action_changed, threshold_changed, node_split_added };

const char* to_string(ChangeKind kind);

struct Change {
  NodeId node_id = -1;
  ChangeKind kind = ChangeKind::action_changed;
  nlohmann::json before;
  nlohmann::json after;
};

struct RepairLog {
  std::string defect;
  std::string target_metric;
  std::vector<NodeId> detected;
  std::vector<Change> changes;
  /// Distinct existing nodes modified plus nodes added.
  long long N_plus = 0;
  /// Node count before the repair.
  long long N_1 = 0;
  /// Free-form notes (fallbacks taken and similar).
  std::vector<std::string> notes;
};

nlohmann::json log_to_json(const RepairLog& log);
RepairLog log_from_json(const nlohmann::json& doc);

struct RepairResult {
  DecisionTreePolicy tree;
  RepairLog log;
};

/// Efficiency of a repair from its log.
metrics::EfficiencyResult efficiency(double M_1, double M_2, const RepairLog& log);

// ---- freezing -----------------------------------------------------------

/// Occupancy cells whose (clipped) bounds differ between timestep slots.
int movement_cells(const StateLayout& layout, const NodeSubspace& clipped);

/// Leaves acting in `a_F` whose subspace admits static obstacles, i.e. at
/// most `m_A` cells change bounds across the timestep slots.
/// Throws LayoutError when the layout has no occupancy block.
std::vector<NodeId> detect_freezing(const DecisionTreePolicy& tree, const std::set<ActionId>& a_F,
                                    int m_A);

/// Each detected leaf turns toward the freer side: a_L when its guaranteed
/// obstacles (current-slot cells with lower bound > occupancy_threshold)
/// are mostly on the right, a_R otherwise (ties included).
/// Throws ConfigError when a_R or a_L is not in the catalog.
RepairResult fix_freezing(const DecisionTreePolicy& tree, const std::vector<NodeId>& detected,
                          ActionId a_R = kRotateRightAction, ActionId a_L = kRotateLeftAction,
                          double occupancy_threshold = 0.0);

// ---- oscillation --------------------------------------------------------

struct OscillationObservations {
  std::map<NodeId, std::vector<StateVector>> O_C;
  std::map<NodeId, std::vector<StateVector>> O_X;
  std::vector<NodeId> N;  // ascending

  void normalize();
};

/// Rolls the tree for n_e episodes (episode e uses derive_seed(seed, e));
/// the sliding window restarts with every episode.
OscillationObservations detect_oscillation(const DecisionTreePolicy& tree,
                                           const envs::ScenarioSpec& scenario, int n_e,
                                           const metrics::OscillationParams& params,
                                           std::uint64_t seed, int jobs = 1);

/// Detected leaves get the reduced-magnitude action, either by direct
/// replacement (no non-oscillating observations, or `force_replace`) or by
/// splitting the leaf on the split that best separates the two state sets.
RepairResult fix_oscillation(const DecisionTreePolicy& tree, const OscillationObservations& obs,
                             bool force_replace = false, double reduce_scale = 0.4);

// ---- vibration ----------------------------------------------------------

/// Branches splitting on an angular-velocity feature.
/// Throws LayoutError for an empty group.
std::vector<NodeId> detect_vibration_m1(const DecisionTreePolicy& tree,
                                        const std::vector<std::size_t>& group);

RepairResult fix_vibration_m1(const DecisionTreePolicy& tree, const std::vector<NodeId>& detected,
                              double h);

struct VibrationSpaceSpec {
  double V_b = 0.5;
  double gamma = 0.9;
  /// Entries 2k and 2k+1 are (omega_r, omega_p) at lag k.
  std::vector<std::size_t> indices;

  /// Weight gamma^lag of each entry of `indices`.
  std::vector<double> weights() const;
  void validate(const StateLayout& layout) const;
};

/// Interval of sum_i w_i |x_i| over the box lower < x <= upper (closure).
std::pair<double, double> weighted_abs_range(std::span<const double> weights,
                                             std::span<const double> lower,
                                             std::span<const double> upper);

/// True when a face of the node's box (restricted to the angular-velocity
/// features, faces from split thresholds only) meets the surface V = V_b.
bool surface_intersects(const DecisionTreePolicy& tree, NodeId node, const VibrationSpaceSpec& spec);

/// Pruned breadth-first descent: intersecting nodes are reported and not
/// expanded; the children of other branches are visited.
std::vector<NodeId> detect_vibration_m2(const DecisionTreePolicy& tree, const VibrationSpaceSpec& spec);

/// Remaps the actions of every leaf at or under a detected node.
/// Throws ConfigError listing leaf actions outside the remap's domain.
RepairResult fix_vibration_m2(const DecisionTreePolicy& tree, const std::vector<NodeId>& detected,
                              const std::map<ActionId, ActionId>& M_c);

}  // namespace msviper::treemod
