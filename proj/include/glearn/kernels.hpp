#pragma once

#include <cstddef>
#include <span>

namespace glearn::kern {

// Dense row reductions used by the learners and the planning routines.
// Each backend fills one table of function pointers; the scalar table is the
// reference semantics. Backends must agree bit for bit on the comparison
// based reductions (min_value, argmin_lowest, masked_min, sup_norm_diff).
// dot may differ by reassociation and is equivalence-tested to tolerance.
struct Ops {
  // sum_i x[i]*y[i]; n == 0 yields 0.
  double (*dot)(const double* x, const double* y, std::size_t n);
  // smallest element; requires n >= 1.
  double (*min_value)(const double* x, std::size_t n);
  // index of the first occurrence of the smallest element; requires n >= 1.
  std::size_t (*argmin_lowest)(const double* x, std::size_t n);
  // max_i |a[i] - b[i]|; n == 0 yields 0.
  double (*sup_norm_diff)(const double* a, const double* b, std::size_t n);
  // min of x[i] over i with weight[i] > 0; +infinity when no weight is
  // positive.
  double (*masked_min)(const double* x, const double* weight, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when the build or the CPU lacks AVX2
const Ops* neon_ops();  // nullptr outside aarch64 builds

// Backend picked once per process. GLEARN_KERNELS=scalar|avx2|neon forces a
// specific backend (falling back to scalar if the named one is unavailable);
// anything else auto-detects.
const Ops& active_ops();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active_ops().dot(x.data(), y.data(), x.size());
}
inline double min_value(std::span<const double> x) {
  return active_ops().min_value(x.data(), x.size());
}
inline std::size_t argmin_lowest(std::span<const double> x) {
  return active_ops().argmin_lowest(x.data(), x.size());
}
inline double sup_norm_diff(std::span<const double> a,
                            std::span<const double> b) {
  return active_ops().sup_norm_diff(a.data(), b.data(), a.size());
}
inline double masked_min(std::span<const double> x,
                         std::span<const double> weight) {
  return active_ops().masked_min(x.data(), weight.data(), x.size());
}

}  // namespace glearn::kern
