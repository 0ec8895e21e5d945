#include "glearn/learners.hpp"

#include <cmath>
#include <stdexcept>

#include "glearn/exploration.hpp"
#include "glearn/kernels.hpp"
#include "glearn/oracle.hpp"

namespace glearn {

double alpha_power(std::uint64_t n, double omega) {
  if (n == 0) throw std::invalid_argument("visit count must be positive");
  return std::pow(static_cast<double>(n), -omega);
}

double beta_at(const BetaSchedule& schedule, std::uint64_t t,
               double bellman_error_avg) {
  switch (schedule.kind) {
    case BetaSchedule::Kind::Constant:
      return schedule.value;
    case BetaSchedule::Kind::Linear:
      return schedule.value * static_cast<double>(t);
    case BetaSchedule::Kind::InverseBellmanError:
      return schedule.value / std::max(bellman_error_avg, 1e-12);
  }
  return 0.0;
}

Learner::Learner(int n_states, int n_actions, double gamma,
                 StochasticPolicy prior, LearnerOptions opt)
    : opt_(opt), gamma_(gamma), prior_(std::move(prior)) {
  if (n_states <= 0 || n_actions <= 0)
    throw std::invalid_argument("state and action counts must be positive");
  if (prior_.n_states() != n_states || prior_.n_actions() != n_actions)
    throw std::invalid_argument("prior shape does not match");
  if (!(opt_.omega > 0.0))
    throw std::invalid_argument("omega must be positive");
  const int n_tables = opt_.algo == Algo::DoubleQ ? 2 : 1;
  tables_.assign(static_cast<std::size_t>(n_tables),
                 ActionValueTable(n_states, n_actions, 0.0));
  counts_.assign(static_cast<std::size_t>(n_tables),
                 std::vector<std::uint64_t>(
                     static_cast<std::size_t>(n_states) * n_actions, 0));
}

double Learner::beta_now() const {
  return beta_at(opt_.beta, t_, bellman_error_avg());
}

void Learner::update(const TransitionSample& x, RngStream& rng) {
  int which = 0;
  if (opt_.algo == Algo::DoubleQ)
    which = static_cast<int>(rng.uniform_below(2));

  ActionValueTable& tbl = tables_[static_cast<std::size_t>(which)];
  auto& counts = counts_[static_cast<std::size_t>(which)];
  const std::size_t flat =
      static_cast<std::size_t>(x.s) * tbl.n_actions() + x.a;
  const double alpha = alpha_power(++counts[flat], opt_.omega);

  double target = x.cost;
  switch (opt_.algo) {
    case Algo::Q:
      if (!x.terminal)
        target += gamma_ * kern::min_value(tbl.row(x.s_next));
      break;
    case Algo::QRho:
      if (!x.terminal)
        target += gamma_ * kern::dot(prior_.row(x.s_next), tbl.row(x.s_next));
      break;
    case Algo::G:
      if (!x.terminal)
        target += gamma_ * free_energy_row(tbl.row(x.s_next),
                                           prior_.row(x.s_next), beta_now());
      break;
    case Algo::DoubleQ:
      if (!x.terminal) {
        // Minimizer from the updated table, value from the other one.
        const std::size_t best = kern::argmin_lowest(tbl.row(x.s_next));
        target += gamma_ * tables_[static_cast<std::size_t>(1 - which)].at(
                               x.s_next, static_cast<int>(best));
      }
      break;
    case Algo::Consistent:
      if (!x.terminal) {
        target += gamma_ * (x.s_next == x.s
                                ? tbl.at(x.s, x.a)
                                : kern::min_value(tbl.row(x.s_next)));
      }
      break;
    case Algo::ExpectedSarsa:
      if (!x.terminal) {
        const std::vector<double> pol =
            epsilon_greedy_row(tbl.row(x.s_next), opt_.sarsa_epsilon);
        target += gamma_ * kern::dot(pol, tbl.row(x.s_next));
      }
      break;
    case Algo::Psi: {
      // Increment form: the whole temporal difference is scaled into the
      // visited entry, with both endpoints measured by the log-average.
      const double bar_next =
          x.terminal ? 0.0
                     : free_energy_row(tbl.row(x.s_next),
                                       prior_.row(x.s_next), 1.0);
      const double bar_here =
          free_energy_row(tbl.row(x.s), prior_.row(x.s), 1.0);
      target = x.cost + gamma_ * bar_next;
      const double delta = target - bar_here;
      tbl.at(x.s, x.a) += alpha * delta;
      finish_update(target, delta);
      return;
    }
  }

  const double old = tbl.at(x.s, x.a);
  const double delta = target - old;
  tbl.at(x.s, x.a) = (1.0 - alpha) * old + alpha * target;
  finish_update(target, delta);
}

void Learner::finish_update(double target, double delta) {
  last_target_ = target;
  last_error_ = delta;
  const double mag = std::abs(delta);
  if (!err_avg_) {
    err_avg_ = mag;
  } else {
    err_avg_ = opt_.error_smoothing * *err_avg_ +
               (1.0 - opt_.error_smoothing) * mag;
  }
  ++t_;
}

void Learner::ranking_row(int s, std::vector<double>& out) const {
  const int na = tables_[0].n_actions();
  out.resize(static_cast<std::size_t>(na));
  if (opt_.algo == Algo::DoubleQ && opt_.double_q_value_mean) {
    const auto a = tables_[0].row(s);
    const auto b = tables_[1].row(s);
    for (int i = 0; i < na; ++i)
      out[static_cast<std::size_t>(i)] = 0.5 * (a[i] + b[i]);
    return;
  }
  const auto row = tables_[0].row(s);
  for (int i = 0; i < na; ++i) out[static_cast<std::size_t>(i)] = row[i];
}

ValueTable Learner::greedy_value() const {
  const int n = tables_[0].n_states();
  ValueTable v(static_cast<std::size_t>(n));
  std::vector<double> row;
  for (int s = 0; s < n; ++s) {
    if (opt_.algo == Algo::Psi && opt_.psi_value_softmin) {
      v[static_cast<std::size_t>(s)] =
          free_energy_row(tables_[0].row(s), prior_.row(s), 1.0);
      continue;
    }
    ranking_row(s, row);
    v[static_cast<std::size_t>(s)] = kern::min_value(row);
  }
  return v;
}

StochasticPolicy Learner::greedy_policy() const {
  const int n = tables_[0].n_states();
  const int na = tables_[0].n_actions();
  StochasticPolicy pi(n, na);
  std::vector<double> row;
  for (int s = 0; s < n; ++s) {
    ranking_row(s, row);
    pi.at(s, static_cast<int>(kern::argmin_lowest(row))) = 1.0;
  }
  return pi;
}

}  // namespace glearn
