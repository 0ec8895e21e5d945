#pragma once

#include <optional>
#include <span>

#include "glearn/mdp.hpp"

namespace glearn {

struct ValueIterationResult {
  ActionValueTable q;
  ValueTable v;
  int sweeps = 0;
};

// Exact optimal values for the cost-minimization objective. Sweeps until the
// sup-norm change of Q drops to tol or below; tol must be positive.
ValueIterationResult value_iteration(const TabularMdp& m, double tol = 1e-12);

struct PolicyEvaluationResult {
  ActionValueTable q;
  ValueTable v;
};

// Exact V and Q of a stochastic policy: a dense linear solve of
// (I - gamma P_pi) V = c_pi for small problems, iterated to 1e-12 residual
// for large ones.
PolicyEvaluationResult policy_evaluation(const TabularMdp& m,
                                         const StochasticPolicy& pi);

// Soft minimum of g under reference weights rho at inverse temperature beta:
//   -(1/beta) log sum_i rho[i] exp(-beta g[i])
// computed with a shift by the minimum over rho's support so large beta
// cannot overflow. beta == 0 gives the plain rho-average (the same dot
// kernel the learners use); beta == +infinity gives the support minimum.
// beta must be nonnegative.
double free_energy_row(std::span<const double> g_row,
                       std::span<const double> rho_row, double beta);

// Boltzmann-like posterior over actions:
//   pi(a) proportional to rho[a] exp(-beta g[a])
// with the same shift; rows sum to 1.0 exactly. beta == +infinity puts all
// mass on the support minimizers (split by rho weight on ties).
StochasticPolicy soft_policy(const ActionValueTable& g,
                             const StochasticPolicy& rho, double beta);

// One application of the soft backup operator:
//   (Bg)(s,a) = E[c|s,a] + gamma sum_s' p(s'|s,a) f(s')
// where f(s') is free_energy_row over g's row at s'. A gamma-contraction in
// the sup norm for every beta.
ActionValueTable soft_bellman(const TabularMdp& m, const StochasticPolicy& rho,
                              double beta, const ActionValueTable& g);

// Fixed point of soft_bellman from the zero table, to sup-norm change tol.
ActionValueTable soft_value_iteration(const TabularMdp& m,
                                      const StochasticPolicy& rho, double beta,
                                      double tol = 1e-12);

// Exact evaluation of a fixed policy pi under the information-regularized
// objective with prior rho at inverse temperature beta.
//   v:    plain expected discounted cost of pi
//   info: discounted KL divergence accumulation,
//         I(s) = KL(pi(.|s) || rho(.|s)) + gamma E_pi[I(s')]
//   g:    state-action version of the regularized cost (absent at beta == 0)
//   f:    free energy of pi, f(s) = KL(s)/beta + sum_a pi(a|s) g(s,a)
//         (absent at beta == 0)
// Requires pi's support to lie inside rho's support; violations name the
// offending (s, a).
struct RegularizedEvaluation {
  ValueTable v;
  ValueTable info;
  std::optional<ActionValueTable> g;
  std::optional<ValueTable> f;
};

RegularizedEvaluation regularized_policy_evaluation(const TabularMdp& m,
                                                    const StochasticPolicy& pi,
                                                    const StochasticPolicy& rho,
                                                    double beta);

}  // namespace glearn
