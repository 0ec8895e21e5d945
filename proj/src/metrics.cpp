#include "glearn/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "glearn/kernels.hpp"
#include "glearn/oracle.hpp"

namespace glearn {
namespace {

double gap_mean(std::span<const ValueTable> estimates,
                std::span<const ValueTable> v_stars,
                std::span<const std::uint8_t> include, bool absolute) {
  if (estimates.size() != v_stars.size() || estimates.empty())
    throw std::invalid_argument("need one estimate per run");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const ValueTable& v = estimates[i];
    const ValueTable& star = v_stars[i];
    if (v.size() != star.size())
      throw std::invalid_argument("value table size mismatch");
    for (std::size_t s = 0; s < v.size(); ++s) {
      if (!include.empty() && include[s] == 0) continue;
      const double d = v[s] - star[s];
      acc += absolute ? std::abs(d) : d;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no states included");
  return acc / static_cast<double>(count);
}

}  // namespace

std::uint64_t TransitionHistogram::total_visits() const {
  std::uint64_t acc = 0;
  for (std::uint64_t v : state_visits) acc += v;
  return acc;
}

void TransitionHistogram::merge(const TransitionHistogram& other) {
  if (other.n_states != n_states)
    throw std::invalid_argument("histogram size mismatch");
  for (std::size_t i = 0; i < state_visits.size(); ++i)
    state_visits[i] += other.state_visits[i];
  for (std::size_t i = 0; i < transition_counts.size(); ++i)
    transition_counts[i] += other.transition_counts[i];
}

double empirical_bias(std::span<const ValueTable> estimates,
                      std::span<const ValueTable> v_stars,
                      std::span<const std::uint8_t> include) {
  return gap_mean(estimates, v_stars, include, false);
}

double mean_abs_error(std::span<const ValueTable> estimates,
                      std::span<const ValueTable> v_stars,
                      std::span<const std::uint8_t> include) {
  return gap_mean(estimates, v_stars, include, true);
}

double policy_suboptimality(std::span<const TabularMdp* const> mdps,
                            std::span<const StochasticPolicy> policies,
                            std::span<const ValueTable> v_stars,
                            std::span<const std::uint8_t> include) {
  if (mdps.size() != policies.size() || mdps.size() != v_stars.size() ||
      mdps.empty())
    throw std::invalid_argument("need one (mdp, policy, v*) triple per run");
  std::vector<ValueTable> evaluated;
  evaluated.reserve(mdps.size());
  for (std::size_t i = 0; i < mdps.size(); ++i)
    evaluated.push_back(policy_evaluation(*mdps[i], policies[i]).v);
  return gap_mean(evaluated, v_stars, include, false);
}

std::vector<double> bellman_error_average(std::span<const double> errors,
                                          double smoothing) {
  if (!(smoothing >= 0.0 && smoothing < 1.0))
    throw std::invalid_argument("smoothing must lie in [0, 1)");
  std::vector<double> out;
  out.reserve(errors.size());
  for (double e : errors) {
    const double mag = std::abs(e);
    out.push_back(out.empty()
                      ? mag
                      : smoothing * out.back() + (1.0 - smoothing) * mag);
  }
  return out;
}

JensenDemoResult jensen_bias_demo(std::span<const double> q_row,
                                  double noise_std, std::size_t n_samples,
                                  RngStream& rng) {
  if (q_row.empty()) throw std::invalid_argument("empty row");
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");
  if (!(noise_std >= 0.0))
    throw std::invalid_argument("noise std must be nonnegative");

  JensenDemoResult out;
  out.true_min = kern::min_value(q_row);

  std::vector<double> noisy(q_row.size());
  double acc = 0.0;
  double acc_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t a = 0; a < q_row.size(); ++a)
      noisy[a] =
          noise_std > 0.0 ? rng.gaussian(q_row[a], noise_std) : q_row[a];
    const double m = kern::min_value(noisy);
    acc += m;
    acc_sq += m * m;
  }
  const double n = static_cast<double>(n_samples);
  out.empirical_min_mean = acc / n;
  const double var =
      std::max(0.0, acc_sq / n - out.empirical_min_mean * out.empirical_min_mean);
  out.sample_std = std::sqrt(var);
  return out;
}

}  // namespace glearn
