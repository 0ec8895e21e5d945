#include "glearn/exploration.hpp"

#include <stdexcept>

#include "glearn/kernels.hpp"

namespace glearn {

std::vector<double> epsilon_greedy_row(std::span<const double> value_row,
                                       double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  const auto n = value_row.size();
  if (n == 0) throw std::invalid_argument("empty value row");

  // The limits reuse the exact constructions of the neighbors they must
  // match: uniform_row for epsilon == 1 and a clean one-hot for epsilon == 0.
  if (epsilon == 1.0) return uniform_row(static_cast<int>(n));
  const std::size_t best = kern::argmin_lowest(value_row);
  std::vector<double> row(n, 0.0);
  if (epsilon == 0.0) {
    row[best] = 1.0;
    return row;
  }
  const double base = epsilon / static_cast<double>(n);
  for (auto& p : row) p = base;
  row[best] += 1.0 - epsilon;
  renormalize_exact(row, best);
  return row;
}

ExplorationStream::ExplorationStream(ExplorationRegime regime,
                                     const TabularMdp& mdp, int start_state)
    : regime_(regime), mdp_(&mdp), start_(start_state), cursor_(start_state) {
  if (!(regime.epsilon >= 0.0 && regime.epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  for (int s = 0; s < mdp.n_states; ++s)
    if (!mdp.is_terminal(s)) nonterminal_.push_back(s);
  if (nonterminal_.empty())
    throw std::invalid_argument("no non-terminal states to explore");
  if (start_state < 0 || start_state >= mdp.n_states)
    throw std::out_of_range("start state out of range");
}

TransitionSample ExplorationStream::next(const ActionValueTable& values,
                                         RngStream& rng) {
  const auto n_actions = static_cast<std::uint64_t>(mdp_->n_actions);
  if (regime_.kind == ExplorationRegime::Kind::UniformIid) {
    const int s = nonterminal_[static_cast<std::size_t>(
        rng.uniform_below(nonterminal_.size()))];
    const int a = static_cast<int>(rng.uniform_below(n_actions));
    return sample_transition(*mdp_, rng, s, a);
  }

  const int s = cursor_;
  int a;
  if (rng.uniform01() < regime_.epsilon) {
    a = static_cast<int>(rng.uniform_below(n_actions));
  } else {
    a = static_cast<int>(kern::argmin_lowest(values.row(s)));
  }
  TransitionSample x = sample_transition(*mdp_, rng, s, a);
  cursor_ = x.terminal ? start_ : x.s_next;
  return x;
}

}  // namespace glearn
