#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace glearn {

// SplitMix64 finalizer, used for all seed derivation.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the bytes of s.
std::uint64_t fnv1a64(std::string_view s);

// Stream seed for (base seed, run index, stream name):
//   mix64(mix64(mix64(base) ^ run) ^ fnv1a64(name))
// so every (run, name) pair gets a decorrelated stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run,
                          std::string_view name);

// One deterministic random stream. Every stochastic routine in the library
// takes one of these explicitly; nothing draws from hidden global state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution; consumes one u64.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1} without modulo bias; consumes one u64 per
  // accepted draw (rejection is vanishingly rare for small n).
  std::uint64_t uniform_below(std::uint64_t n);

  // Box-Muller; consumes exactly two u64 per call (no cached spare), plus
  // rejection of the measure-zero u == 0 draw.
  double gaussian(double mean, double stddev);

 private:
  std::mt19937_64 eng_;
};

}  // namespace glearn
