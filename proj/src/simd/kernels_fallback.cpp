// Non-x86 builds route the avx2 namespace to the scalar reference.
#include "msviper/simd/kernels.hpp"

namespace msviper::simd::avx2 {

void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out) {
  scalar::box_membership(lower, upper, states, out);
}
double weighted_abs_sum(std::span<const double> weights, std::span<const double> x) {
  return scalar::weighted_abs_sum(weights, x);
}
void weighted_abs_sums(std::span<const double> weights, std::span<const double> rows,
                       std::span<double> out) {
  scalar::weighted_abs_sums(weights, rows, out);
}
void poisson_binomial_step(std::span<double> dist, std::size_t n, double p) {
  scalar::poisson_binomial_step(dist, n, p);
}

}  // namespace msviper::simd::avx2
