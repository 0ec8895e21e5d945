#include "glearn/kernels.hpp"

#include <arm_neon.h>

#include <limits>

// NEON backends, 2-wide float64. Same contract as the AVX2 lane: comparison
// based reductions match scalar bitwise, dot is tolerance equivalent.

namespace glearn::kern {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) out += x[i] * y[i];
  return out;
}

double min_value_neon(const double* x, std::size_t n) {
  if (n < 2) return x[0];
  float64x2_t acc = vld1q_f64(x);
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) acc = vminq_f64(acc, vld1q_f64(x + i));
  double m = vminvq_f64(acc);
  for (; i < n; ++i)
    if (x[i] < m) m = x[i];
  return m;
}

std::size_t argmin_lowest_neon(const double* x, std::size_t n) {
  const double m = min_value_neon(x, n);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;  // unreachable for finite input
}

double sup_norm_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vmaxq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

double masked_min_neon(const double* x, const double* weight, std::size_t n) {
  const float64x2_t inf = vdupq_n_f64(std::numeric_limits<double>::infinity());
  const float64x2_t zero = vdupq_n_f64(0.0);
  float64x2_t acc = inf;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t keep = vcgtq_f64(vld1q_f64(weight + i), zero);
    acc = vminq_f64(acc, vbslq_f64(keep, vld1q_f64(x + i), inf));
  }
  double m = vminvq_f64(acc);
  for (; i < n; ++i)
    if (weight[i] > 0.0 && x[i] < m) m = x[i];
  return m;
}

constexpr Ops kNeon{dot_neon,          min_value_neon, argmin_lowest_neon,
                    sup_norm_diff_neon, masked_min_neon, "neon"};

}  // namespace

const Ops* neon_ops() { return &kNeon; }

}  // namespace glearn::kern
