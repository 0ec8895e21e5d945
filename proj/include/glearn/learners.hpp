#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "glearn/mdp.hpp"
#include "glearn/rng.hpp"

namespace glearn {

enum class Algo {
  Q,              // hard min backup
  QRho,           // prior-averaged backup
  G,              // soft backup at the scheduled inverse temperature
  Psi,            // log-average backup in increment form
  DoubleQ,        // two tables, coin-flipped cross updates
  Consistent,     // self-transitions bootstrap from the updated entry
  ExpectedSarsa,  // backup under the epsilon-greedy policy of the table
};

// Polynomial learning rate n^(-omega) for the n-th visit of a pair; n >= 1.
double alpha_power(std::uint64_t n, double omega);

struct BetaSchedule {
  enum class Kind { Constant, Linear, InverseBellmanError };
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant: beta; Linear: slope k; Inverse: scale

  static BetaSchedule constant(double beta) {
    return {Kind::Constant, beta};
  }
  static BetaSchedule linear(double k) { return {Kind::Linear, k}; }
  static BetaSchedule inverse_bellman_error(double scale) {
    return {Kind::InverseBellmanError, scale};
  }
};

// Schedule value before the update with step counter t (t = number of
// completed updates so far, starting at 0). InverseBellmanError divides by
// the smoothed absolute update error, floored at 1e-12.
double beta_at(const BetaSchedule& schedule, std::uint64_t t,
               double bellman_error_avg);

struct LearnerOptions {
  Algo algo = Algo::Q;
  double omega = 0.8;
  BetaSchedule beta = BetaSchedule::constant(0.0);
  double sarsa_epsilon = 0.1;     // ExpectedSarsa backup policy
  double error_smoothing = 0.999; // exponential smoothing of |update error|
  bool psi_value_softmin = false; // state values from the log-average row
  bool double_q_value_mean = false;  // rank and value from (A + B) / 2
};

// One tabular learner. All algorithms consume the same TransitionSample
// stream; only DoubleQ draws additional randomness (its table coin).
class Learner {
 public:
  Learner(int n_states, int n_actions, double gamma, StochasticPolicy prior,
          LearnerOptions opt);

  void update(const TransitionSample& x, RngStream& rng);

  // State values and the greedy policy of the current estimate. Defaults to
  // the row minimum of the primary table; see the psi/double-q options.
  ValueTable greedy_value() const;
  StochasticPolicy greedy_policy() const;

  const ActionValueTable& table(int i = 0) const { return tables_[i]; }
  ActionValueTable& table(int i = 0) { return tables_[i]; }
  const std::vector<std::uint64_t>& visit_counts(int i = 0) const {
    return counts_[i];
  }
  std::vector<std::uint64_t>& visit_counts(int i = 0) { return counts_[i]; }
  int n_tables() const { return static_cast<int>(tables_.size()); }

  std::uint64_t step() const { return t_; }
  // Smoothed |update error|; 0.0 before the first update.
  double bellman_error_avg() const { return err_avg_.value_or(0.0); }
  // Inverse temperature the next update would use.
  double beta_now() const;
  double last_target() const { return last_target_; }
  double last_error() const { return last_error_; }
  const LearnerOptions& options() const { return opt_; }
  const StochasticPolicy& prior() const { return prior_; }

 private:
  // Row the greedy policy ranks state s by, written into `out`.
  void ranking_row(int s, std::vector<double>& out) const;
  void finish_update(double target, double delta);

  LearnerOptions opt_;
  double gamma_ = 0.0;
  StochasticPolicy prior_;
  std::vector<ActionValueTable> tables_;
  std::vector<std::vector<std::uint64_t>> counts_;
  std::uint64_t t_ = 0;
  std::optional<double> err_avg_;
  double last_target_ = 0.0;
  double last_error_ = 0.0;
};

}  // namespace glearn
