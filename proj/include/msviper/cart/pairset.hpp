#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "msviper/core/actions.hpp"
#include "msviper/core/layout.hpp"

namespace msviper::cart {

/// Multiset of (state, action) pairs with optional nonnegative weights.
/// States are stored row-major in one buffer.
class PairSet {
 public:
  PairSet() = default;
  explicit PairSet(std::size_t dim) : dim_(dim) {}

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  bool weighted() const { return !weights_.empty(); }

  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dim_, dim_};
  }
  ActionId action(std::size_t i) const { return actions_[i]; }
  /// 1.0 for unweighted sets.
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }
  double feature(std::size_t i, std::size_t f) const { return states_[i * dim_ + f]; }

  std::span<const double> states() const { return states_; }
  std::span<const ActionId> actions() const { return actions_; }
  std::span<const double> weights() const { return weights_; }

  void add(std::span<const double> state, ActionId action);
  void add(std::span<const double> state, ActionId action, double weight);
  void append(const PairSet& other);
  void reserve(std::size_t n);

  PairSet subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const PairSet&, const PairSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> states_;
  std::vector<ActionId> actions_;
  std::vector<double> weights_;
};

/// CSV with header "f0,...,f{d-1},action[,weight]". Values use 17 significant digits.
void save_pairs_csv(const PairSet& pairs, const std::filesystem::path& path);
PairSet load_pairs_csv(const std::filesystem::path& path);

}  // namespace msviper::cart
