#include "msviper/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace msviper::simd {

namespace {

Isa detect() {
  if (const char* env = std::getenv("MSVIPER_SIMD")) {
    if (std::string_view(env) == "scalar") return Isa::scalar;
  }
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out) {
  if (active_isa() == Isa::avx2) return avx2::box_membership(lower, upper, states, out);
  scalar::box_membership(lower, upper, states, out);
}

double weighted_abs_sum(std::span<const double> weights, std::span<const double> x) {
  if (active_isa() == Isa::avx2) return avx2::weighted_abs_sum(weights, x);
  return scalar::weighted_abs_sum(weights, x);
}

void weighted_abs_sums(std::span<const double> weights, std::span<const double> rows,
                       std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::weighted_abs_sums(weights, rows, out);
  scalar::weighted_abs_sums(weights, rows, out);
}

void poisson_binomial_step(std::span<double> dist, std::size_t n, double p) {
  if (active_isa() == Isa::avx2) return avx2::poisson_binomial_step(dist, n, p);
  scalar::poisson_binomial_step(dist, n, p);
}

}  // namespace msviper::simd
