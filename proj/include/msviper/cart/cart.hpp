#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msviper/cart/pairset.hpp"
#include "msviper/core/tree.hpp"

namespace msviper::cart {

struct CartConfig {
  std::optional<int> max_depth;
  int min_samples_split = 2;
  double min_impurity_decrease = 0.0;
  /// When set, each node scans a random subset of this many features.
  std::optional<int> max_features;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

/// Candidates must beat the incumbent by more than this to win, so ties
/// resolve to the lower feature index, then the lower threshold.
inline constexpr double kSplitTieTolerance = 1e-12;

/// 1 - sum_a p_a^2 over weighted label fractions. Throws EmptyDatasetError.
double gini(std::span<const ActionId> labels, std::span<const double> weights = {});

/// Gini of a class-weight histogram with the given total; 0 when total is 0.
double gini_from_counts(std::span<const double> counts, double total);

/// Midpoint between two consecutive distinct sorted values, nudged so that
/// `low` routes left and `high` routes right.
double midpoint_threshold(double low, double high);

/// Exhaustive scan of midpoint thresholds over `features` for the rows
/// listed in `rows` (all rows when empty). Returns nullopt when no candidate
/// reaches `min_impurity_decrease`, or the node is pure.
std::optional<Split> best_split(const PairSet& pairs, std::span<const std::size_t> rows,
                                std::span<const int> features, double min_impurity_decrease = 0.0);

/// Convenience overload: all rows, all features.
std::optional<Split> best_split(const PairSet& pairs, double min_impurity_decrease = 0.0);

/// Greedy recursive CART growth. Pairs are put in canonical order first, so
/// the result does not depend on input order. Node ids are preorder.
DecisionTreePolicy train(const PairSet& pairs, const CartConfig& cfg, const StateLayout& layout,
                         const ActionCatalog& actions);

/// Weighted-majority label, ties to the lowest action id.
ActionId majority_action(const PairSet& pairs, std::span<const std::size_t> rows,
                         std::size_t action_count);

}  // namespace msviper::cart
