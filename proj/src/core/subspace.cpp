#include "msviper/core/subspace.hpp"

#include <algorithm>
#include <limits>

#include "msviper/core/errors.hpp"
#include "msviper/simd/kernels.hpp"

namespace msviper {

NodeSubspace NodeSubspace::unbounded(std::size_t dim) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {std::vector<double>(dim, -inf), std::vector<double>(dim, inf)};
}

bool NodeSubspace::contains(std::span<const double> state) const {
  if (state.size() != lower.size()) throw DimensionError("state dimension does not match subspace");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < state[i] && state[i] <= upper[i])) return false;
  }
  return true;
}

std::vector<std::uint8_t> NodeSubspace::contains_batch(std::span<const double> states) const {
  const std::size_t dim = lower.size();
  if (dim == 0 || states.size() % dim != 0) {
    throw DimensionError("batch size is not a multiple of the subspace dimension");
  }
  std::vector<std::uint8_t> flags(states.size() / dim);
  simd::box_membership(lower, upper, states, flags);
  return flags;
}

NodeSubspace NodeSubspace::clipped(const StateLayout& layout) const {
  NodeSubspace out = *this;
  if (layout.ranges.empty()) return out;
  for (std::size_t i = 0; i < out.lower.size(); ++i) {
    const FeatureRange r = layout.range(i);
    out.lower[i] = std::max(out.lower[i], r.lower);
    out.upper[i] = std::min(out.upper[i], r.upper);
  }
  return out;
}

bool NodeSubspace::is_subset_of(const NodeSubspace& other) const {
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] < other.lower[i] || upper[i] > other.upper[i]) return false;
  }
  return true;
}

}  // namespace msviper
