#pragma once

// Shared helpers for the test suite: small MDP constructors, independent
// oracles (exhaustive policy enumeration, Monte Carlo rollouts), and the
// statistical thresholds used by the distribution checks.

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "glearn/mdp.hpp"
#include "glearn/oracle.hpp"
#include "glearn/rng.hpp"

namespace testutil {

// Empty MDP shell with self-loop rows; callers overwrite what they need.
inline glearn::TabularMdp make_shell(int n_states, int n_actions,
                                     double gamma) {
  glearn::TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.transition.assign(static_cast<std::size_t>(n_states) * n_actions *
                          n_states,
                      0.0);
  m.cost.assign(static_cast<std::size_t>(n_states) * n_actions, {});
  m.terminal.assign(static_cast<std::size_t>(n_states), 0);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) m.row(s, a)[s] = 1.0;
  return m;
}

// Dense random MDP with exactly stochastic rows. cost_std == 0 keeps the
// costs deterministic.
inline glearn::TabularMdp make_random_mdp(std::mt19937_64& eng, int n_states,
                                          int n_actions, double gamma,
                                          int n_terminal = 0,
                                          double cost_std = 0.0) {
  glearn::TabularMdp m = make_shell(n_states, n_actions, gamma);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::uniform_real_distribution<double> cost(-1.0, 3.0);
  for (int s = 0; s < n_states; ++s) {
    if (s < n_terminal) {
      m.terminal[static_cast<std::size_t>(s)] = 1;
      continue;  // keep the absorbing zero-cost shell rows
    }
    for (int a = 0; a < n_actions; ++a) {
      auto row = m.row(s, a);
      double total = 0.0;
      for (int t = 0; t < n_states; ++t) {
        row[t] = unit(eng);
        total += row[t];
      }
      std::size_t pivot = 0;
      for (int t = 0; t < n_states; ++t) {
        row[t] /= total;
        if (row[t] > row[pivot]) pivot = static_cast<std::size_t>(t);
      }
      glearn::renormalize_exact(row, pivot);
      m.cost_at(s, a) = {cost(eng), cost_std};
    }
  }
  return m;
}

// Exhaustive minimum over all deterministic stationary policies, evaluated
// exactly. Exponential in the state count; keep the inputs tiny.
inline glearn::ValueTable brute_force_optimal(const glearn::TabularMdp& m) {
  const int n = m.n_states;
  const int na = m.n_actions;
  std::vector<int> choice(static_cast<std::size_t>(n), 0);
  glearn::ValueTable best(static_cast<std::size_t>(n),
                          std::numeric_limits<double>::infinity());
  for (;;) {
    glearn::StochasticPolicy pi(n, na);
    for (int s = 0; s < n; ++s)
      pi.at(s, choice[static_cast<std::size_t>(s)]) = 1.0;
    const glearn::ValueTable v = glearn::policy_evaluation(m, pi).v;
    for (int s = 0; s < n; ++s)
      best[static_cast<std::size_t>(s)] =
          std::min(best[static_cast<std::size_t>(s)],
                   v[static_cast<std::size_t>(s)]);
    int pos = 0;
    while (pos < n && ++choice[static_cast<std::size_t>(pos)] == na) {
      choice[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

// Monte Carlo estimate of the discounted cost of `pi` from state s0.
inline double mc_policy_value(const glearn::TabularMdp& m,
                              const glearn::StochasticPolicy& pi, int s0,
                              int horizon, int n_rollouts,
                              glearn::RngStream& rng) {
  double acc = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    int s = s0;
    double disc = 1.0;
    for (int t = 0; t < horizon && !m.is_terminal(s); ++t) {
      const auto row = pi.row(s);
      const double u = rng.uniform01();
      int a = m.n_actions - 1;
      double cum = 0.0;
      for (int b = 0; b < m.n_actions; ++b) {
        cum += row[b];
        if (u < cum) {
          a = b;
          break;
        }
      }
      const glearn::TransitionSample x = glearn::sample_transition(m, rng, s, a);
      acc += disc * x.cost;
      disc *= m.gamma;
      s = x.s_next;
    }
  }
  return acc / n_rollouts;
}

inline double chi_square_critical(int df, double alpha = 0.001) {
  const boost::math::chi_squared dist(df);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

// Kolmogorov-Smirnov critical value at significance 0.001.
inline double ks_critical(std::size_t n) {
  return 1.9495 / std::sqrt(static_cast<double>(n));
}

// Chi-square statistic of observed counts against expected probabilities.
inline double chi_square_stat(const std::vector<std::uint64_t>& counts,
                              const std::vector<double>& probs,
                              std::uint64_t total) {
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(total);
    if (expected == 0.0) continue;
    const double d = static_cast<double>(counts[i]) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace testutil
