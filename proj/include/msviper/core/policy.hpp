#pragma once

#include <span>

#include "msviper/core/actions.hpp"

namespace msviper {

/// Anything that maps a state vector to a discrete action.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionId act(std::span<const double> state) const = 0;
};

}  // namespace msviper
