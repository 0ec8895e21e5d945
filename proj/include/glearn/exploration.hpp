#pragma once

#include <span>
#include <vector>

#include "glearn/mdp.hpp"
#include "glearn/rng.hpp"

namespace glearn {

// Greedy-biased action distribution: epsilon/n to every action plus the
// remaining 1 - epsilon on the first minimizer of the row. The returned row
// sums to 1.0 exactly. epsilon == 1 is exactly the uniform row and
// epsilon == 0 is a one-hot on the minimizer.
std::vector<double> epsilon_greedy_row(std::span<const double> value_row,
                                       double epsilon);

struct ExplorationRegime {
  enum class Kind {
    UniformIid,      // independent (s, a) uniform over non-terminal states
    EpsilonGreedy,   // trajectory following an epsilon-greedy policy
  };
  Kind kind = Kind::UniformIid;
  double epsilon = 0.1;
};

// Produces the stream of environment interactions that drives a learner.
// UniformIid draws a non-terminal state and an action uniformly each step;
// EpsilonGreedy walks a trajectory from start_state, resetting to it after a
// terminal transition, choosing the greedy action by lowest-index argmin
// over the supplied value row.
//
// Draw order per step, all from the one stream: state (UniformIid only),
// action selector, the uniform action when exploring, then the transition
// draws of sample_transition.
class ExplorationStream {
 public:
  ExplorationStream(ExplorationRegime regime, const TabularMdp& mdp,
                    int start_state = 0);

  TransitionSample next(const ActionValueTable& values, RngStream& rng);

  int current_state() const { return cursor_; }

 private:
  ExplorationRegime regime_;
  const TabularMdp* mdp_;
  std::vector<int> nonterminal_;
  int start_ = 0;
  int cursor_ = 0;
};

}  // namespace glearn
