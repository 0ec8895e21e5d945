#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glearn/mdp.hpp"
#include "glearn/rng.hpp"

namespace glearn {

// One evaluation point of one run (or of a run average).
struct MetricPoint {
  std::uint64_t iteration = 0;
  double bias = 0.0;
  double mean_abs_error = 0.0;
  double policy_suboptimality = 0.0;
  double bellman_error_avg = 0.0;
};

struct MetricSeries {
  std::string algorithm;
  std::vector<MetricPoint> points;
};

// State-visit and state-to-state transition counts of an interaction stream.
struct TransitionHistogram {
  int n_states = 0;
  std::vector<std::uint64_t> state_visits;       // visits of s
  std::vector<std::uint64_t> transition_counts;  // [s][s_next], row-major

  TransitionHistogram() = default;
  explicit TransitionHistogram(int n)
      : n_states(n),
        state_visits(static_cast<std::size_t>(n), 0),
        transition_counts(static_cast<std::size_t>(n) * n, 0) {}

  void add(const TransitionSample& x) {
    state_visits[static_cast<std::size_t>(x.s)] += 1;
    transition_counts[static_cast<std::size_t>(x.s) * n_states + x.s_next] +=
        1;
  }
  std::uint64_t total_visits() const;
  void merge(const TransitionHistogram& other);
};

// The estimation metrics average over runs i and over the included states s
// of the pointwise value-function gaps. An empty include mask means every
// state; otherwise states with include[s] != 0 count.
//
//   empirical_bias: mean of  V_i(s) - V*_i(s)   (signed; cancellation shows
//                   the direction of the estimation bias)
//   mean_abs_error: mean of |V_i(s) - V*_i(s)|
double empirical_bias(std::span<const ValueTable> estimates,
                      std::span<const ValueTable> v_stars,
                      std::span<const std::uint8_t> include = {});
double mean_abs_error(std::span<const ValueTable> estimates,
                      std::span<const ValueTable> v_stars,
                      std::span<const std::uint8_t> include = {});

// Mean over runs and included states of V^{pi_i}(s) - V*_i(s), with each
// greedy policy evaluated exactly on its own MDP. Nonnegative up to solver
// error.
double policy_suboptimality(std::span<const TabularMdp* const> mdps,
                            std::span<const StochasticPolicy> policies,
                            std::span<const ValueTable> v_stars,
                            std::span<const std::uint8_t> include = {});

// Exponentially smoothed absolute-error trace: out[0] = |e[0]| and
// out[i] = smoothing * out[i-1] + (1 - smoothing) * |e[i]|.
std::vector<double> bellman_error_average(std::span<const double> errors,
                                          double smoothing);

// Monte Carlo illustration of the minimization bias: perturb every entry of
// q_row with independent Gaussian(0, noise_std) noise, take the minimum, and
// average over n_samples draws. E[min] undershoots min(q_row) for
// noise_std > 0.
struct JensenDemoResult {
  double empirical_min_mean = 0.0;
  double true_min = 0.0;
  double sample_std = 0.0;  // std of the min draws around their mean
};
JensenDemoResult jensen_bias_demo(std::span<const double> q_row,
                                  double noise_std, std::size_t n_samples,
                                  RngStream& rng);

}  // namespace glearn
