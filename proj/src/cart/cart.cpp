#include "msviper/cart/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "msviper/core/errors.hpp"

namespace msviper::cart {

void CartConfig::validate() const {
  if (max_depth && *max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  if (!(min_impurity_decrease >= 0.0)) throw ConfigError("min_impurity_decrease must be >= 0");
  if (max_features && *max_features < 1) throw ConfigError("max_features must be >= 1");
}

double gini_from_counts(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (const double c : counts) {
    const double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double gini(std::span<const ActionId> labels, std::span<const double> weights) {
  if (labels.empty()) throw EmptyDatasetError("gini of an empty label set");
  if (!weights.empty() && weights.size() != labels.size()) {
    throw DimensionError("gini: weights and labels differ in length");
  }
  const ActionId max_label = *std::max_element(labels.begin(), labels.end());
  std::vector<double> counts(static_cast<std::size_t>(std::max(max_label, 0)) + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw ConfigError("negative label in gini");
    const double w = weights.empty() ? 1.0 : weights[i];
    counts[labels[i]] += w;
    total += w;
  }
  return gini_from_counts(counts, total);
}

double midpoint_threshold(double low, double high) {
  const double mid = low + (high - low) / 2.0;
  // Adjacent doubles: the midpoint rounds onto `high`, which would route it left.
  return mid < high ? mid : low;
}

namespace {

std::size_t label_space(const PairSet& pairs) {
  ActionId max_label = 0;
  for (const ActionId a : pairs.actions()) max_label = std::max(max_label, a);
  return static_cast<std::size_t>(max_label) + 1;
}

/// Scans one feature whose rows are already sorted by value.
void scan_feature(const PairSet& pairs, std::span<const std::size_t> sorted, int feature,
                  std::span<const double> node_counts, double node_total, double parent_impurity,
                  std::vector<double>& left_counts, std::optional<Split>& best) {
  std::fill(left_counts.begin(), left_counts.end(), 0.0);
  std::vector<double> right_counts(node_counts.begin(), node_counts.end());
  double left_total = 0.0;
  double right_total = node_total;
  const auto f = static_cast<std::size_t>(feature);
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    const std::size_t row = sorted[k];
    const double w = pairs.weight(row);
    left_counts[pairs.action(row)] += w;
    right_counts[pairs.action(row)] -= w;
    left_total += w;
    right_total -= w;
    const double here = pairs.feature(row, f);
    const double next = pairs.feature(sorted[k + 1], f);
    if (!(here < next)) continue;
    const double gl = gini_from_counts(left_counts, left_total);
    const double gr = gini_from_counts(right_counts, right_total);
    const double decrease =
        parent_impurity - (left_total / node_total) * gl - (right_total / node_total) * gr;
    if (!best || decrease > best->impurity_decrease + kSplitTieTolerance) {
      best = Split{feature, midpoint_threshold(here, next), decrease};
    }
  }
}

bool node_is_pure(const std::vector<double>& counts) {
  int nonzero = 0;
  for (const double c : counts) nonzero += c > 0.0 ? 1 : 0;
  return nonzero <= 1;
}

std::optional<Split> best_split_sorted(const PairSet& pairs,
                                       const std::vector<std::vector<std::size_t>>& sorted,
                                       std::span<const int> features, std::size_t labels,
                                       double min_impurity_decrease) {
  const auto& any_order = sorted[static_cast<std::size_t>(features.empty() ? 0 : features[0])];
  std::vector<double> counts(labels, 0.0);
  double total = 0.0;
  for (const std::size_t row : any_order) {
    counts[pairs.action(row)] += pairs.weight(row);
    total += pairs.weight(row);
  }
  if (node_is_pure(counts) || total <= 0.0) return std::nullopt;
  const double parent = gini_from_counts(counts, total);
  std::vector<double> scratch(labels, 0.0);
  std::optional<Split> best;
  for (const int f : features) {
    scan_feature(pairs, sorted[static_cast<std::size_t>(f)], f, counts, total, parent, scratch,
                 best);
  }
  if (!best || best->impurity_decrease < min_impurity_decrease - kSplitTieTolerance) {
    return std::nullopt;
  }
  return best;
}

std::vector<std::size_t> sorted_by_feature(const PairSet& pairs,
                                           std::span<const std::size_t> rows, std::size_t f) {
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs.feature(a, f) < pairs.feature(b, f);
  });
  return order;
}

}  // namespace

std::optional<Split> best_split(const PairSet& pairs, std::span<const std::size_t> rows,
                                std::span<const int> features, double min_impurity_decrease) {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  if (rows.empty()) return std::nullopt;
  std::vector<int> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());
  sorted_features.erase(std::unique(sorted_features.begin(), sorted_features.end()),
                        sorted_features.end());
  std::vector<std::vector<std::size_t>> sorted(pairs.dimension());
  for (const int f : sorted_features) {
    if (f < 0 || static_cast<std::size_t>(f) >= pairs.dimension()) {
      throw DimensionError("split feature " + std::to_string(f) + " outside the pair dimension");
    }
    sorted[static_cast<std::size_t>(f)] = sorted_by_feature(pairs, rows, static_cast<std::size_t>(f));
  }
  if (sorted_features.empty()) return std::nullopt;
  return best_split_sorted(pairs, sorted, sorted_features, label_space(pairs),
                           min_impurity_decrease);
}

std::optional<Split> best_split(const PairSet& pairs, double min_impurity_decrease) {
  std::vector<int> features(pairs.dimension());
  std::iota(features.begin(), features.end(), 0);
  return best_split(pairs, {}, features, min_impurity_decrease);
}

ActionId majority_action(const PairSet& pairs, std::span<const std::size_t> rows,
                         std::size_t action_count) {
  std::vector<double> counts(std::max(action_count, label_space(pairs)), 0.0);
  for (const std::size_t r : rows) counts[pairs.action(r)] += pairs.weight(r);
  ActionId best = 0;
  for (std::size_t a = 1; a < counts.size(); ++a) {
    if (counts[a] > counts[best]) best = static_cast<ActionId>(a);
  }
  return best;
}

namespace {

class Grower {
 public:
  Grower(const PairSet& pairs, const CartConfig& cfg, std::size_t action_count)
      : pairs_(pairs), cfg_(cfg), action_count_(action_count), labels_(label_space(pairs)),
        rng_(cfg.rng_seed) {
    labels_ = std::max(labels_, action_count_);
  }

  std::vector<TreeNode> grow(std::vector<std::size_t> rows) {
    // Per-feature orderings for the root; children inherit them by stable partition.
    std::vector<std::vector<std::size_t>> sorted(pairs_.dimension());
    for (std::size_t f = 0; f < pairs_.dimension(); ++f) {
      sorted[f] = sorted_by_feature(pairs_, rows, f);
    }
    grow_node(std::move(rows), std::move(sorted), 0);
    return std::move(nodes_);
  }

 private:
  NodeId grow_node(std::vector<std::size_t> rows, std::vector<std::vector<std::size_t>> sorted,
                   int depth) {
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(TreeNode::leaf(id, majority_action(pairs_, rows, action_count_)));

    const bool depth_ok = !cfg_.max_depth || depth < *cfg_.max_depth;
    if (!depth_ok || rows.size() < static_cast<std::size_t>(cfg_.min_samples_split)) return id;

    const auto features = features_for_node();
    const auto split =
        best_split_sorted(pairs_, sorted, features, labels_, cfg_.min_impurity_decrease);
    if (!split) return id;

    const auto f = static_cast<std::size_t>(split->feature);
    auto goes_left = [&](std::size_t row) { return pairs_.feature(row, f) <= split->threshold; };

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (const std::size_t r : rows) (goes_left(r) ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) return id;
    rows.clear();
    rows.shrink_to_fit();

    std::vector<std::vector<std::size_t>> left_sorted(sorted.size());
    std::vector<std::vector<std::size_t>> right_sorted(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      left_sorted[k].reserve(left_rows.size());
      right_sorted[k].reserve(right_rows.size());
      for (const std::size_t r : sorted[k]) (goes_left(r) ? left_sorted[k] : right_sorted[k]).push_back(r);
    }
    sorted.clear();
    sorted.shrink_to_fit();

    const NodeId left = grow_node(std::move(left_rows), std::move(left_sorted), depth + 1);
    const NodeId right = grow_node(std::move(right_rows), std::move(right_sorted), depth + 1);
    nodes_[id] = TreeNode::branch(id, split->feature, split->threshold, left, right);
    return id;
  }

  std::vector<int> features_for_node() {
    std::vector<int> features(pairs_.dimension());
    std::iota(features.begin(), features.end(), 0);
    if (cfg_.max_features && static_cast<std::size_t>(*cfg_.max_features) < features.size()) {
      std::shuffle(features.begin(), features.end(), rng_);
      features.resize(static_cast<std::size_t>(*cfg_.max_features));
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  const PairSet& pairs_;
  const CartConfig& cfg_;
  std::size_t action_count_;
  std::size_t labels_;
  std::mt19937_64 rng_;
  std::vector<TreeNode> nodes_;
};

/// Lexicographic (state, action, weight) order of pair indices.
std::vector<std::size_t> canonical_order(const PairSet& pairs) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto sa = pairs.state(a);
    const auto sb = pairs.state(b);
    if (!std::equal(sa.begin(), sa.end(), sb.begin(), sb.end())) {
      return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
    }
    if (pairs.action(a) != pairs.action(b)) return pairs.action(a) < pairs.action(b);
    return pairs.weight(a) < pairs.weight(b);
  });
  return order;
}

}  // namespace

DecisionTreePolicy train(const PairSet& pairs, const CartConfig& cfg, const StateLayout& layout,
                         const ActionCatalog& actions) {
  cfg.validate();
  if (pairs.empty()) throw EmptyDatasetError("cannot train a tree on an empty pair set");
  if (pairs.dimension() != layout.dimension()) {
    throw DimensionError("pair states have " + std::to_string(pairs.dimension()) +
                         " features, layout expects " + std::to_string(layout.dimension()));
  }
  for (const ActionId a : pairs.actions()) {
    if (!contains_action(actions, a)) {
      throw ConfigError("pair label " + std::to_string(a) + " is not in the action catalog");
    }
  }
  const PairSet canonical = pairs.subset(canonical_order(pairs));
  std::vector<std::size_t> rows(canonical.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Grower grower(canonical, cfg, actions.size());
  auto nodes = grower.grow(std::move(rows));
  return DecisionTreePolicy(layout, actions, std::move(nodes), 0);
}

}  // namespace msviper::cart
