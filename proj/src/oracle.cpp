#include "glearn/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "glearn/kernels.hpp"

namespace glearn {
namespace {

constexpr int kDenseSolveLimit = 1024;  // states; beyond this, iterate

void check_positive_tol(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

void check_beta(double beta) {
  if (std::isnan(beta) || beta < 0.0)
    throw std::invalid_argument("beta must be nonnegative");
}

ActionValueTable mean_costs(const TabularMdp& m) {
  ActionValueTable c(m.n_states, m.n_actions);
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) c.at(s, a) = m.cost_at(s, a).mean;
  return c;
}

// P_pi(s, t) = sum_a pi(a|s) p(t|s,a), row-major n x n.
std::vector<double> policy_transition(const TabularMdp& m,
                                      const StochasticPolicy& pi) {
  const auto n = static_cast<std::size_t>(m.n_states);
  std::vector<double> p(n * n, 0.0);
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      const double w = pi.at(s, a);
      if (w == 0.0) continue;
      const auto row = m.row(s, a);
      double* dst = p.data() + static_cast<std::size_t>(s) * n;
      for (int t = 0; t < m.n_states; ++t) dst[t] += w * row[t];
    }
  }
  return p;
}

// Solves (I - gamma P_pi) x = rhs for each rhs: one LU decomposition with
// multiple right-hand sides when the state space is small, fixed-point
// iteration otherwise.
std::vector<ValueTable> solve_policy_systems(
    const TabularMdp& m, const StochasticPolicy& pi,
    const std::vector<const ValueTable*>& rhs) {
  const int n = m.n_states;
  const std::vector<double> p_pi = policy_transition(m, pi);
  std::vector<ValueTable> out;
  out.reserve(rhs.size());

  if (n <= kDenseSolveLimit) {
    Eigen::MatrixXd a(n, n);
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        a(s, t) = (s == t ? 1.0 : 0.0) -
                  m.gamma * p_pi[static_cast<std::size_t>(s) * n + t];
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    for (const ValueTable* b : rhs) {
      Eigen::VectorXd bv(n);
      for (int s = 0; s < n; ++s) bv(s) = (*b)[static_cast<std::size_t>(s)];
      const Eigen::VectorXd x = lu.solve(bv);
      ValueTable v(static_cast<std::size_t>(n));
      for (int s = 0; s < n; ++s) v[static_cast<std::size_t>(s)] = x(s);
      out.push_back(std::move(v));
    }
    return out;
  }

  for (const ValueTable* b : rhs) {
    ValueTable x(static_cast<std::size_t>(n), 0.0);
    ValueTable next(static_cast<std::size_t>(n), 0.0);
    for (long sweep = 0; sweep < 20'000'000; ++sweep) {
      for (int s = 0; s < n; ++s) {
        const double* row = p_pi.data() + static_cast<std::size_t>(s) * n;
        next[static_cast<std::size_t>(s)] =
            (*b)[static_cast<std::size_t>(s)] +
            m.gamma * kern::dot({row, static_cast<std::size_t>(n)}, x);
      }
      const double change = kern::sup_norm_diff(next, x);
      x.swap(next);
      if (change <= 1e-13) break;
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

ValueIterationResult value_iteration(const TabularMdp& m, double tol) {
  check_positive_tol(tol);
  const ActionValueTable cbar = mean_costs(m);
  ActionValueTable q(m.n_states, m.n_actions);
  ActionValueTable q_next(m.n_states, m.n_actions);
  ValueTable v(static_cast<std::size_t>(m.n_states), 0.0);

  int sweeps = 0;
  for (;; ++sweeps) {
    if (sweeps >= 1'000'000)
      throw std::logic_error("value iteration failed to converge");
    for (int s = 0; s < m.n_states; ++s) {
      for (int a = 0; a < m.n_actions; ++a) {
        q_next.at(s, a) = m.is_terminal(s)
                              ? 0.0
                              : cbar.at(s, a) + m.gamma * kern::dot(m.row(s, a), v);
      }
    }
    const double change = kern::sup_norm_diff(q_next.data(), q.data());
    std::swap(q, q_next);
    for (int s = 0; s < m.n_states; ++s)
      v[static_cast<std::size_t>(s)] = kern::min_value(q.row(s));
    if (change <= tol) break;
  }
  return {std::move(q), std::move(v), sweeps + 1};
}

PolicyEvaluationResult policy_evaluation(const TabularMdp& m,
                                         const StochasticPolicy& pi) {
  if (pi.n_states() != m.n_states || pi.n_actions() != m.n_actions)
    throw std::invalid_argument("policy shape does not match the MDP");

  const ActionValueTable cbar = mean_costs(m);
  ValueTable c_pi(static_cast<std::size_t>(m.n_states));
  for (int s = 0; s < m.n_states; ++s)
    c_pi[static_cast<std::size_t>(s)] = kern::dot(pi.row(s), cbar.row(s));

  auto sol = solve_policy_systems(m, pi, {&c_pi});
  ValueTable v = std::move(sol[0]);

  ActionValueTable q(m.n_states, m.n_actions);
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      q.at(s, a) = m.is_terminal(s)
                       ? 0.0
                       : cbar.at(s, a) + m.gamma * kern::dot(m.row(s, a), v);
    }
  }
  for (int s = 0; s < m.n_states; ++s)
    if (m.is_terminal(s)) v[static_cast<std::size_t>(s)] = 0.0;
  return {std::move(q), std::move(v)};
}

double free_energy_row(std::span<const double> g_row,
                       std::span<const double> rho_row, double beta) {
  check_beta(beta);
  if (g_row.size() != rho_row.size())
    throw std::invalid_argument("row length mismatch");

  if (beta == 0.0) return kern::dot(rho_row, g_row);

  const double lo = kern::masked_min(g_row, rho_row);
  if (!std::isfinite(lo))
    throw std::invalid_argument("reference row has empty support");
  if (std::isinf(beta)) return lo;

  // Shifted log-sum-exp over the support; entries off the support are
  // skipped (their zero weight would otherwise multiply an overflowing exp).
  double acc = 0.0;
  for (std::size_t i = 0; i < g_row.size(); ++i) {
    if (rho_row[i] > 0.0) acc += rho_row[i] * std::exp(-beta * (g_row[i] - lo));
  }
  return lo - std::log(acc) / beta;
}

StochasticPolicy soft_policy(const ActionValueTable& g,
                             const StochasticPolicy& rho, double beta) {
  check_beta(beta);
  if (rho.n_states() != g.n_states() || rho.n_actions() != g.n_actions())
    throw std::invalid_argument("policy shape does not match the table");

  const int n = g.n_states();
  const int na = g.n_actions();
  StochasticPolicy pi(n, na);
  std::vector<double> w(static_cast<std::size_t>(na));

  for (int s = 0; s < n; ++s) {
    const auto g_row = g.row(s);
    const auto rho_row = rho.row(s);
    auto out = pi.row(s);

    if (beta == 0.0) {
      for (int a = 0; a < na; ++a) out[a] = rho_row[a];
      continue;
    }

    const double lo = kern::masked_min(g_row, rho_row);
    if (!std::isfinite(lo))
      throw std::invalid_argument("reference row has empty support");

    double total = 0.0;
    if (std::isinf(beta)) {
      for (int a = 0; a < na; ++a) {
        w[static_cast<std::size_t>(a)] =
            (rho_row[a] > 0.0 && g_row[a] == lo) ? rho_row[a] : 0.0;
        total += w[static_cast<std::size_t>(a)];
      }
    } else {
      for (int a = 0; a < na; ++a) {
        w[static_cast<std::size_t>(a)] =
            rho_row[a] > 0.0
                ? rho_row[a] * std::exp(-beta * (g_row[a] - lo))
                : 0.0;
        total += w[static_cast<std::size_t>(a)];
      }
    }

    std::size_t pivot = 0;
    for (int a = 0; a < na; ++a) {
      out[a] = w[static_cast<std::size_t>(a)] / total;
      if (out[a] > out[pivot]) pivot = static_cast<std::size_t>(a);
    }
    renormalize_exact(out, pivot);
  }
  return pi;
}

ActionValueTable soft_bellman(const TabularMdp& m, const StochasticPolicy& rho,
                              double beta, const ActionValueTable& g) {
  check_beta(beta);
  if (g.n_states() != m.n_states || g.n_actions() != m.n_actions ||
      rho.n_states() != m.n_states || rho.n_actions() != m.n_actions)
    throw std::invalid_argument("shape mismatch");

  // Terminal states contribute zero continuation, matching the learners'
  // dropped bootstrap on terminal transitions.
  ValueTable f(static_cast<std::size_t>(m.n_states));
  for (int s = 0; s < m.n_states; ++s)
    f[static_cast<std::size_t>(s)] =
        m.is_terminal(s) ? 0.0 : free_energy_row(g.row(s), rho.row(s), beta);

  ActionValueTable b(m.n_states, m.n_actions);
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      b.at(s, a) = m.is_terminal(s)
                       ? 0.0
                       : expected_cost(m, s, a) +
                             m.gamma * kern::dot(m.row(s, a), f);
    }
  }
  return b;
}

ActionValueTable soft_value_iteration(const TabularMdp& m,
                                      const StochasticPolicy& rho, double beta,
                                      double tol) {
  check_positive_tol(tol);
  check_beta(beta);
  ActionValueTable g(m.n_states, m.n_actions);
  for (int sweep = 0; sweep < 1'000'000; ++sweep) {
    ActionValueTable next = soft_bellman(m, rho, beta, g);
    const double change = kern::sup_norm_diff(next.data(), g.data());
    g = std::move(next);
    if (change <= tol) return g;
  }
  throw std::logic_error("soft value iteration failed to converge");
}

RegularizedEvaluation regularized_policy_evaluation(
    const TabularMdp& m, const StochasticPolicy& pi,
    const StochasticPolicy& rho, double beta) {
  check_beta(beta);
  if (pi.n_states() != m.n_states || pi.n_actions() != m.n_actions ||
      rho.n_states() != m.n_states || rho.n_actions() != m.n_actions)
    throw std::invalid_argument("shape mismatch");

  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      if (pi.at(s, a) > 0.0 && !(rho.at(s, a) > 0.0)) {
        std::ostringstream os;
        os << "pi has support outside rho at (s=" << s << ",a=" << a << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }

  const int n = m.n_states;
  const ActionValueTable cbar = mean_costs(m);

  // Per-state information cost; terminal states contribute none.
  ValueTable kl(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    if (m.is_terminal(s)) continue;
    double acc = 0.0;
    for (int a = 0; a < m.n_actions; ++a) {
      const double p = pi.at(s, a);
      if (p > 0.0) acc += p * std::log(p / rho.at(s, a));
    }
    kl[static_cast<std::size_t>(s)] = acc;
  }

  ValueTable c_pi(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s)
    c_pi[static_cast<std::size_t>(s)] = kern::dot(pi.row(s), cbar.row(s));

  RegularizedEvaluation out;

  if (beta == 0.0) {
    auto sol = solve_policy_systems(m, pi, {&c_pi, &kl});
    out.v = std::move(sol[0]);
    out.info = std::move(sol[1]);
    return out;
  }

  // Regularized per-step cost k(s,a) = cbar + (gamma/beta) E_p[KL(s')];
  // the information term vanishes as 1/beta at beta == +infinity.
  const bool hard = std::isinf(beta);
  ActionValueTable k(m.n_states, m.n_actions);
  ValueTable k_pi(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      const double shift =
          hard ? 0.0 : (m.gamma / beta) * kern::dot(m.row(s, a), kl);
      k.at(s, a) = (m.is_terminal(s) ? 0.0 : cbar.at(s, a)) + shift;
    }
    k_pi[static_cast<std::size_t>(s)] = kern::dot(pi.row(s), k.row(s));
  }

  // Three systems share the matrix (I - gamma P_pi): plain cost, the
  // information accumulation, and the policy-averaged regularized value w
  // with w(s) = sum_a pi(a|s) g(s,a).
  auto sol = solve_policy_systems(m, pi, {&c_pi, &kl, &k_pi});
  out.v = std::move(sol[0]);
  out.info = std::move(sol[1]);
  const ValueTable w = std::move(sol[2]);

  ActionValueTable g(m.n_states, m.n_actions);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < m.n_actions; ++a)
      g.at(s, a) = m.is_terminal(s)
                       ? 0.0
                       : k.at(s, a) + m.gamma * kern::dot(m.row(s, a), w);

  ValueTable f(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s)
    f[static_cast<std::size_t>(s)] =
        (hard ? 0.0 : kl[static_cast<std::size_t>(s)] / beta) +
        kern::dot(pi.row(s), g.row(s));

  out.g = std::move(g);
  out.f = std::move(f);
  return out;
}

}  // namespace glearn
