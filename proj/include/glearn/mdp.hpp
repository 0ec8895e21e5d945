#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glearn/rng.hpp"

namespace glearn {

// Dense (state, action) table of doubles. Doubles as the storage for value
// estimates (Q, G, Psi) and expected costs.
class ActionValueTable {
 public:
  ActionValueTable() = default;
  ActionValueTable(int n_states, int n_actions, double init = 0.0)
      : n_states_(n_states),
        n_actions_(n_actions),
        v_(static_cast<std::size_t>(n_states) * n_actions, init) {}

  double& at(int s, int a) { return v_[idx(s, a)]; }
  double at(int s, int a) const { return v_[idx(s, a)]; }
  std::span<double> row(int s) {
    return {v_.data() + idx(s, 0), static_cast<std::size_t>(n_actions_)};
  }
  std::span<const double> row(int s) const {
    return {v_.data() + idx(s, 0), static_cast<std::size_t>(n_actions_)};
  }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::span<const double> data() const { return v_; }
  std::span<double> data() { return v_; }
  bool all_finite() const;

 private:
  std::size_t idx(int s, int a) const {
    return static_cast<std::size_t>(s) * n_actions_ + a;
  }
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> v_;
};

using ValueTable = std::vector<double>;  // one entry per state

// Per (state, action) scalar cost distribution: Gaussian(mean, std), with
// std == 0 meaning the cost is deterministically `mean`.
struct CostModel {
  double mean = 0.0;
  double std = 0.0;
};

// Row-stochastic action distribution per state.
class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  StochasticPolicy(int n_states, int n_actions)
      : table_(n_states, n_actions, 0.0) {}

  // Uniform rows that sum to 1.0 exactly.
  static StochasticPolicy uniform(int n_states, int n_actions);

  std::span<double> row(int s) { return table_.row(s); }
  std::span<const double> row(int s) const { return table_.row(s); }
  double at(int s, int a) const { return table_.at(s, a); }
  double& at(int s, int a) { return table_.at(s, a); }
  int n_states() const { return table_.n_states(); }
  int n_actions() const { return table_.n_actions(); }

 private:
  ActionValueTable table_;
};

// Finite MDP with dense transitions and cost-minimization convention.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  // p(s' | s, a), row-major [s][a][s'].
  std::vector<double> transition;
  // cost model per (s, a), row-major [s][a].
  std::vector<CostModel> cost;
  double gamma = 0.0;
  // 1 for absorbing zero-cost states.
  std::vector<std::uint8_t> terminal;

  std::span<const double> row(int s, int a) const {
    const std::size_t off =
        (static_cast<std::size_t>(s) * n_actions + a) * n_states;
    return {transition.data() + off, static_cast<std::size_t>(n_states)};
  }
  std::span<double> row(int s, int a) {
    const std::size_t off =
        (static_cast<std::size_t>(s) * n_actions + a) * n_states;
    return {transition.data() + off, static_cast<std::size_t>(n_states)};
  }
  const CostModel& cost_at(int s, int a) const {
    return cost[static_cast<std::size_t>(s) * n_actions + a];
  }
  CostModel& cost_at(int s, int a) {
    return cost[static_cast<std::size_t>(s) * n_actions + a];
  }
  bool is_terminal(int s) const { return terminal[s] != 0; }
};

// One environment interaction. `terminal` describes s_next.
struct TransitionSample {
  int s = 0;
  int a = 0;
  double cost = 0.0;
  int s_next = 0;
  bool terminal = false;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Structural checks: shape, row sums within 1e-12 of 1, probabilities in
// [0,1], discount in [0,1), nonnegative cost stds, and the absorbing
// zero-cost convention on terminal states. Violations name the offending
// (s, a) entries.
ValidationReport validate_mdp(const TabularMdp& m);

// E[c | s, a]; throws std::out_of_range for bad indices.
double expected_cost(const TabularMdp& m, int s, int a);

// Draws s' by inverse CDF over the transition row (one uniform, scanning
// states in ascending index), then the cost (one Gaussian when std > 0,
// nothing otherwise). Terminal states return cost 0 and s' = s without
// consuming randomness.
TransitionSample sample_transition(const TabularMdp& m, RngStream& rng, int s,
                                   int a);

// Nudges row[pivot] so that the left-to-right sum of the row is exactly 1.0.
// Used everywhere a probability row is constructed, so "rows sum to one" can
// hold exactly rather than to tolerance.
void renormalize_exact(std::span<double> row, std::size_t pivot);

// Uniform probability row of length n summing to 1.0 exactly.
std::vector<double> uniform_row(int n);

}  // namespace glearn
