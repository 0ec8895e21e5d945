#include "glearn/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <limits>

namespace glearn::kern {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double min_value_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] < m) m = x[i];
  return m;
}

std::size_t argmin_lowest_scalar(const double* x, std::size_t n) {
  // Two passes: the value first, then the first index equal to it. The
  // vector backends share this shape, which keeps tie-breaking identical.
  const double m = min_value_scalar(x, n);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;  // unreachable for finite input
}

double sup_norm_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

double masked_min_scalar(const double* x, const double* weight,
                         std::size_t n) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (weight[i] > 0.0 && x[i] < m) m = x[i];
  return m;
}

constexpr Ops kScalar{dot_scalar,          min_value_scalar,
                      argmin_lowest_scalar, sup_norm_diff_scalar,
                      masked_min_scalar,    "scalar"};

const Ops& select_backend() {
  const char* want = std::getenv("GLEARN_KERNELS");
  if (want != nullptr) {
    if (std::strcmp(want, "scalar") == 0) return kScalar;
    if (std::strcmp(want, "avx2") == 0) {
      const Ops* v = avx2_ops();
      return v != nullptr ? *v : kScalar;
    }
    if (std::strcmp(want, "neon") == 0) {
      const Ops* v = neon_ops();
      return v != nullptr ? *v : kScalar;
    }
  }
  if (const Ops* v = avx2_ops()) return *v;
  if (const Ops* v = neon_ops()) return *v;
  return kScalar;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

#if !defined(GLEARN_BUILD_AVX2)
const Ops* avx2_ops() { return nullptr; }
#endif
#if !defined(GLEARN_BUILD_NEON)
const Ops* neon_ops() { return nullptr; }
#endif

const Ops& active_ops() {
  static const Ops& chosen = select_backend();
  return chosen;
}

}  // namespace glearn::kern
