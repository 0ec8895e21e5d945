#include "glearn/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace glearn {

bool ActionValueTable::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

std::vector<double> uniform_row(int n) {
  std::vector<double> row(static_cast<std::size_t>(n), 1.0 / n);
  renormalize_exact(row, 0);
  return row;
}

StochasticPolicy StochasticPolicy::uniform(int n_states, int n_actions) {
  StochasticPolicy pi(n_states, n_actions);
  const std::vector<double> r = uniform_row(n_actions);
  for (int s = 0; s < n_states; ++s) {
    auto dst = pi.row(s);
    for (int a = 0; a < n_actions; ++a) dst[a] = r[a];
  }
  return pi;
}

namespace {

double fold_sum(std::span<const double> row) {
  double s = 0.0;
  for (double x : row) s += x;
  return s;
}

// Scans the ulp neighborhood of row[idx] for a value whose running sum lands
// exactly on 1. Restores the entry and reports failure when no such value
// exists within range.
bool absorb_residual_at(std::span<double> row, std::size_t idx) {
  const double center = row[idx];
  double up = center;
  double down = center;
  for (int j = 0; j < 128; ++j) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    row[idx] = up;
    if (fold_sum(row) == 1.0) return true;
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    row[idx] = down;
    if (fold_sum(row) == 1.0) return true;
  }
  row[idx] = center;
  return false;
}

}  // namespace

void renormalize_exact(std::span<double> row, std::size_t pivot) {
  for (int round = 0; round < 8; ++round) {
    const double s = fold_sum(row);
    if (s == 1.0) return;
    const double prev = row[pivot];
    row[pivot] += 1.0 - s;
    if (row[pivot] == prev) break;  // residual below the pivot's resolution
  }
  if (fold_sum(row) == 1.0) return;

  if (absorb_residual_at(row, pivot)) return;

  // Round-to-even can park the running sum on a lattice that steps over 1
  // for every choice of the pivot entry alone, so let another entry take the
  // final ulp. Heaviest entries first keeps the relative perturbation small.
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&row](std::size_t a, std::size_t b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  for (std::size_t idx : order) {
    if (idx == pivot) continue;
    if (absorb_residual_at(row, idx)) return;
  }
  throw std::logic_error("renormalize_exact failed to converge");
}

ValidationReport validate_mdp(const TabularMdp& m) {
  ValidationReport rep;
  auto add = [&rep](const std::string& s) { rep.violations.push_back(s); };

  if (m.n_states <= 0 || m.n_actions <= 0) {
    add("state and action counts must be positive");
    return rep;
  }
  const auto n = static_cast<std::size_t>(m.n_states);
  const auto na = static_cast<std::size_t>(m.n_actions);
  if (m.transition.size() != n * na * n) {
    add("transition table has wrong size");
    return rep;
  }
  if (m.cost.size() != n * na) {
    add("cost table has wrong size");
    return rep;
  }
  if (m.terminal.size() != n) {
    add("terminal mask has wrong size");
    return rep;
  }
  if (!(m.gamma >= 0.0 && m.gamma < 1.0)) {
    std::ostringstream os;
    os << "discount out of range: gamma = " << m.gamma;
    add(os.str());
  }

  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      const auto row = m.row(s, a);
      double sum = 0.0;
      for (int t = 0; t < m.n_states; ++t) {
        const double p = row[t];
        if (!(p >= 0.0 && p <= 1.0)) {
          std::ostringstream os;
          os << "transition probability out of [0,1] at (s=" << s
             << ",a=" << a << ",s'=" << t << "): " << p;
          add(os.str());
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "transition row (s=" << s << ",a=" << a << ") sums to " << sum;
        add(os.str());
      }
      const CostModel& c = m.cost_at(s, a);
      if (!(c.std >= 0.0)) {
        std::ostringstream os;
        os << "negative cost std at (s=" << s << ",a=" << a << ")";
        add(os.str());
      }
      if (!std::isfinite(c.mean) || !std::isfinite(c.std)) {
        std::ostringstream os;
        os << "non-finite cost model at (s=" << s << ",a=" << a << ")";
        add(os.str());
      }
    }
  }

  for (int s = 0; s < m.n_states; ++s) {
    if (!m.is_terminal(s)) continue;
    for (int a = 0; a < m.n_actions; ++a) {
      if (std::abs(m.row(s, a)[s] - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "terminal state " << s << " is not absorbing under a=" << a;
        add(os.str());
      }
      const CostModel& c = m.cost_at(s, a);
      if (c.mean != 0.0 || c.std != 0.0) {
        std::ostringstream os;
        os << "terminal state " << s << " has nonzero cost under a=" << a;
        add(os.str());
      }
    }
  }
  return rep;
}

double expected_cost(const TabularMdp& m, int s, int a) {
  if (s < 0 || s >= m.n_states) throw std::out_of_range("state out of range");
  if (a < 0 || a >= m.n_actions)
    throw std::out_of_range("action out of range");
  return m.cost_at(s, a).mean;
}

TransitionSample sample_transition(const TabularMdp& m, RngStream& rng, int s,
                                   int a) {
  if (s < 0 || s >= m.n_states) throw std::out_of_range("state out of range");
  if (a < 0 || a >= m.n_actions)
    throw std::out_of_range("action out of range");

  if (m.is_terminal(s)) return {s, a, 0.0, s, true};

  const auto row = m.row(s, a);
  const double u = rng.uniform01();
  int next = m.n_states - 1;
  double acc = 0.0;
  for (int t = 0; t < m.n_states; ++t) {
    acc += row[t];
    if (u < acc) {
      next = t;
      break;
    }
  }
  // Guard against u landing beyond the accumulated mass by rounding: fall
  // back to the last state with positive probability.
  if (row[next] == 0.0) {
    for (int t = m.n_states - 1; t >= 0; --t) {
      if (row[t] > 0.0) {
        next = t;
        break;
      }
    }
  }

  const CostModel& c = m.cost_at(s, a);
  const double cost = c.std > 0.0 ? rng.gaussian(c.mean, c.std) : c.mean;
  return {s, a, cost, next, m.is_terminal(next)};
}

}  // namespace glearn
