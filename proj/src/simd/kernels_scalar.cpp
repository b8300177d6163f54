#include "msviper/simd/kernels.hpp"

#include <cmath>

namespace msviper::simd::scalar {

void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out) {
  const std::size_t dim = lower.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = states.data() + r * dim;
    std::uint8_t inside = 1;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(lower[i] < row[i] && row[i] <= upper[i])) {
        inside = 0;
        break;
      }
    }
    out[r] = inside;
  }
}

double weighted_abs_sum(std::span<const double> weights, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) sum += weights[i] * std::fabs(x[i]);
  return sum;
}

void weighted_abs_sums(std::span<const double> weights, std::span<const double> rows,
                       std::span<double> out) {
  const std::size_t dim = weights.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = weighted_abs_sum(weights, rows.subspan(r * dim, dim));
  }
}

void poisson_binomial_step(std::span<double> dist, std::size_t n, double p) {
  const double q = 1.0 - p;
  dist[n + 1] = dist[n] * p;
  for (std::size_t j = n; j > 0; --j) dist[j] = dist[j] * q + dist[j - 1] * p;
  dist[0] = dist[0] * q;
}

}  // namespace msviper::simd::scalar
