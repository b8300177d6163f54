#include "msviper/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace msviper::simd::avx2 {

void box_membership(std::span<const double> lower, std::span<const double> upper,
                    std::span<const double> states, std::span<std::uint8_t> out) {
  const std::size_t dim = lower.size();
  const std::size_t wide = dim - dim % 4;
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = states.data() + r * dim;
    std::uint8_t inside = 1;
    std::size_t i = 0;
    for (; i < wide; i += 4) {
      const __m256d x = _mm256_loadu_pd(row + i);
      const __m256d lo = _mm256_loadu_pd(lower.data() + i);
      const __m256d hi = _mm256_loadu_pd(upper.data() + i);
      const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(lo, x, _CMP_LT_OQ),
                                       _mm256_cmp_pd(x, hi, _CMP_LE_OQ));
      if (_mm256_movemask_pd(ok) != 0xF) {
        inside = 0;
        break;
      }
    }
    if (inside) {
      for (; i < dim; ++i) {
        if (!(lower[i] < row[i] && row[i] <= upper[i])) {
          inside = 0;
          break;
        }
      }
    }
    out[r] = inside;
  }
}

namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double weighted_abs_sum(std::span<const double> weights, std::span<const double> x) {
  const std::size_t dim = weights.size();
  const std::size_t wide = dim - dim % 4;
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < wide; i += 4) {
    const __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(x.data() + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(weights.data() + i), v));
  }
  double sum = horizontal_sum(acc);
  for (std::size_t i = wide; i < dim; ++i) sum += weights[i] * std::fabs(x[i]);
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
  const __m256d pv = _mm256_set1_pd(p);
  const __m256d qv = _mm256_set1_pd(q);
  // Walk downward so dist[j - 1] is still the previous value when read.
  dist[n + 1] = dist[n] * p;
  std::size_t j = n;
  while (j >= 4) {
    const std::size_t base = j - 3;
    const __m256d cur = _mm256_loadu_pd(dist.data() + base);
    const __m256d prev = _mm256_loadu_pd(dist.data() + base - 1);
    _mm256_storeu_pd(dist.data() + base,
                     _mm256_add_pd(_mm256_mul_pd(cur, qv), _mm256_mul_pd(prev, pv)));
    j -= 4;
  }
  for (; j > 0; --j) dist[j] = dist[j] * q + dist[j - 1] * p;
  dist[0] = dist[0] * q;
}

}  // namespace msviper::simd::avx2
