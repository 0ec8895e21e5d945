#include "glearn/kernels.hpp"

#include <immintrin.h>

#include <limits>

// AVX2 backends for the row reductions. The comparison based reductions are
// exact (min/max networks commute for non-NaN input), so they must match the
// scalar lane bitwise. dot reassociates into four lanes and is only held to
// tolerance against scalar.

namespace glearn::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, swap));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, swap));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(x + i);
    const __m256d b = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(a, b));
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i] * y[i];
  return out;
}

double min_value_avx2(const double* x, std::size_t n) {
  if (n < 4) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i] < m) m = x[i];
    return m;
  }
  __m256d acc = _mm256_loadu_pd(x);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
  double m = hmin(acc);
  for (; i < n; ++i)
    if (x[i] < m) m = x[i];
  return m;
}

std::size_t argmin_lowest_avx2(const double* x, std::size_t n) {
  const double m = min_value_avx2(x, n);
  const __m256d mv = _mm256_set1_pd(m);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d eq = _mm256_cmp_pd(_mm256_loadu_pd(x + i), mv, _CMP_EQ_OQ);
    const int mask = _mm256_movemask_pd(eq);
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  for (; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;  // unreachable for finite input
}

double sup_norm_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double m = hmax(acc);
  for (; i < n; ++i) {
    const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

double masked_min_avx2(const double* x, const double* weight, std::size_t n) {
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = inf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_loadu_pd(weight + i);
    const __m256d keep = _mm256_cmp_pd(w, zero, _CMP_GT_OQ);
    const __m256d v = _mm256_blendv_pd(inf, _mm256_loadu_pd(x + i), keep);
    acc = _mm256_min_pd(acc, v);
  }
  double m = hmin(acc);
  for (; i < n; ++i)
    if (weight[i] > 0.0 && x[i] < m) m = x[i];
  return m;
}

constexpr Ops kAvx2{dot_avx2,          min_value_avx2, argmin_lowest_avx2,
                    sup_norm_diff_avx2, masked_min_avx2, "avx2"};

}  // namespace

const Ops* avx2_ops() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace glearn::kern
