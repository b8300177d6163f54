#pragma once

// Data-parallel inner loops used by subspace routing checks, vibration
// scoring and the coverage dynamic program. Every kernel has a scalar
// reference and an AVX2 variant; the variant is picked once at runtime
// from CPUID and can be pinned with MSVIPER_SIMD=scalar.

#include <cstddef>
#include <cstdint>
#include <span>

namespace msviper::simd {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// True when the running CPU can execute the AVX2 variants.
bool avx2_available();

/// Overrides dispatch (tests use this to compare variants).
void force_isa(Isa isa);

// Dispatching entry points.

/// out[r] = 1 iff lower[i] < states[r*dim+i] <= upper[i] for every i.
void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out);

/// Sum over i of weights[i] * |x[i]|.
double weighted_abs_sum(std::span<const double> weights, std::span<const double> x);

/// out[r] = weighted_abs_sum(weights, rows[r]) for a row-major batch.
void weighted_abs_sums(std::span<const double> weights, std::span<const double> rows,
                       std::span<double> out);

/// One Poisson-binomial convolution step. `dist` holds P(count = j) for
/// j = 0..n in dist[0..n] and must have room for n + 2 entries; on return
/// dist[0..n+1] is the distribution after adding a Bernoulli(p) trial.
void poisson_binomial_step(std::span<double> dist, std::size_t n, double p);

namespace scalar {
void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out);
double weighted_abs_sum(std::span<const double> weights, std::span<const double> x);
void weighted_abs_sums(std::span<const double> weights, std::span<const double> rows,
                       std::span<double> out);
void poisson_binomial_step(std::span<double> dist, std::size_t n, double p);
}  // namespace scalar

namespace avx2 {
void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out);
double weighted_abs_sum(std::span<const double> weights, std::span<const double> x);
void weighted_abs_sums(std::span<const double> weights, std::span<const double> rows,
                       std::span<double> out);
void poisson_binomial_step(std::span<double> dist, std::size_t n, double p);
}  // namespace avx2

}  // namespace msviper::simd
