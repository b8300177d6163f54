#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msviper/core/layout.hpp"

namespace msviper {

/// Axis-aligned box implied by the splits on a root-to-node path.
///
/// Bounds follow the routing convention: a left edge (value <= threshold)
/// closes the upper bound, a right edge (value > threshold) opens the lower
/// bound, so membership is lower[i] < x[i] <= upper[i].
struct NodeSubspace {
  std::vector<double> lower;
  std::vector<double> upper;

  static NodeSubspace unbounded(std::size_t dim);

  std::size_t dimension() const { return lower.size(); }
  bool contains(std::span<const double> state) const;

  /// Membership flags for a row-major batch of states.
  std::vector<std::uint8_t> contains_batch(std::span<const double> states) const;

  /// Intersects every axis with the layout's declared physical range.
  NodeSubspace clipped(const StateLayout& layout) const;

  bool is_subset_of(const NodeSubspace& other) const;
};

}  // namespace msviper
