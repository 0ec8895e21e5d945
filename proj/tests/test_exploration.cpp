#include "glearn/exploration.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "glearn/domains.hpp"
#include "glearn/mdp.hpp"
#include "glearn/rng.hpp"
#include "test_util.hpp"

using glearn::ActionValueTable;
using glearn::ExplorationRegime;
using glearn::ExplorationStream;
using glearn::TabularMdp;

namespace {

ExplorationRegime uniform_iid() {
  ExplorationRegime r;
  r.kind = ExplorationRegime::Kind::UniformIid;
  return r;
}

ExplorationRegime eps_greedy(double epsilon) {
  ExplorationRegime r;
  r.kind = ExplorationRegime::Kind::EpsilonGreedy;
  r.epsilon = epsilon;
  return r;
}

}  // namespace

TEST(EpsilonGreedyRow, HandValues) {
  const std::vector<double> values = {1.0, 3.0};
  const std::vector<double> row = glearn::epsilon_greedy_row(values, 0.1);
  EXPECT_DOUBLE_EQ(row[0], 0.95);
  EXPECT_DOUBLE_EQ(row[1], 0.05);

  const std::vector<double> uniform = glearn::epsilon_greedy_row(values, 1.0);
  EXPECT_EQ(uniform[0], 0.5);
  EXPECT_EQ(uniform[1], 0.5);

  const std::vector<double> greedy = glearn::epsilon_greedy_row(values, 0.0);
  EXPECT_EQ(greedy[0], 1.0);
  EXPECT_EQ(greedy[1], 0.0);
}

TEST(EpsilonGreedyRow, TiesGoToTheLowestIndex) {
  const std::vector<double> values = {2.0, 1.0, 1.0};
  const std::vector<double> row = glearn::epsilon_greedy_row(values, 0.3);
  EXPECT_GT(row[1], row[2]);
  EXPECT_DOUBLE_EQ(row[2], 0.1);
}

TEST(EpsilonGreedyRow, SumsToOneExactly) {
  std::mt19937_64 eng(17);
  std::uniform_real_distribution<double> val(-4.0, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(eng() % 11);
    std::vector<double> values(static_cast<std::size_t>(n));
    for (double& v : values) v = val(eng);
    const double eps = (rep % 10) / 10.0;
    const std::vector<double> row = glearn::epsilon_greedy_row(values, eps);
    double sum = 0.0;
    for (double p : row) sum += p;
    EXPECT_EQ(sum, 1.0) << "rep=" << rep;
  }
}

TEST(EpsilonGreedyRow, RejectsBadInputs) {
  const std::vector<double> values = {1.0};
  EXPECT_THROW(glearn::epsilon_greedy_row(values, -0.1), std::invalid_argument);
  EXPECT_THROW(glearn::epsilon_greedy_row(values, 1.5), std::invalid_argument);
  EXPECT_THROW(glearn::epsilon_greedy_row({}, 0.5), std::invalid_argument);
}

TEST(Exploration, UniformIidIsUniformOverStateActionPairs) {
  std::mt19937_64 eng(23);
  const TabularMdp m = testutil::make_random_mdp(eng, 5, 3, 0.9, 1);
  ExplorationStream stream(uniform_iid(), m);
  const ActionValueTable values(5, 3);
  glearn::RngStream rng(902);

  // Terminal state 0 must never be visited; the remaining 12 pairs are
  // equally likely.
  const std::uint64_t total = 100000;
  std::vector<std::uint64_t> counts(12, 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    const auto x = stream.next(values, rng);
    ASSERT_NE(x.s, 0);
    ++counts[static_cast<std::size_t>((x.s - 1) * 3 + x.a)];
  }
  const std::vector<double> probs(12, 1.0 / 12.0);
  EXPECT_LT(testutil::chi_square_stat(counts, probs, total),
            testutil::chi_square_critical(11));
}

TEST(Exploration, UniformIidCoversTheGridworld) {
  glearn::RngStream build_rng(1);
  const glearn::BuiltDomain d = glearn::build_gridworld(
      glearn::load_map(std::string(GLEARN_SOURCE_DIR) + "/maps/gridworld8.map"),
      glearn::CostVariant{}, build_rng);
  ExplorationStream stream(uniform_iid(), d.mdp);
  const ActionValueTable values(d.mdp.n_states, d.mdp.n_actions);
  glearn::RngStream rng(55);

  std::vector<std::uint64_t> visits(static_cast<std::size_t>(d.mdp.n_states), 0);
  for (int i = 0; i < 1000000; ++i) {
    const auto x = stream.next(values, rng);
    ++visits[static_cast<std::size_t>(x.s)];
  }
  EXPECT_EQ(visits[static_cast<std::size_t>(d.goal_state)], 0u);
  std::uint64_t lowest = ~0ull;
  for (int s = 0; s < d.mdp.n_states; ++s) {
    if (s == d.goal_state) continue;
    lowest = std::min(lowest, visits[static_cast<std::size_t>(s)]);
  }
  // 52 non-terminal states, about 19230 expected visits each.
  EXPECT_GT(lowest, 17000u);
}

TEST(Exploration, GreedyWalkFollowsTheArgmin) {
  // Two-state deterministic chain: action 0 moves, action 1 stays.
  TabularMdp m = testutil::make_shell(2, 2, 0.9);
  m.row(0, 0)[0] = 0.0;
  m.row(0, 0)[1] = 1.0;
  m.row(1, 0)[1] = 0.0;
  m.row(1, 0)[0] = 1.0;
  ActionValueTable values(2, 2);
  values.at(0, 0) = 0.0;
  values.at(0, 1) = 1.0;
  values.at(1, 0) = 0.0;
  values.at(1, 1) = 1.0;

  ExplorationStream stream(eps_greedy(0.0), m, 0);
  glearn::RngStream rng(7);
  int expected_state = 0;
  for (int i = 0; i < 20; ++i) {
    const auto x = stream.next(values, rng);
    EXPECT_EQ(x.s, expected_state);
    EXPECT_EQ(x.a, 0);
    expected_state = x.s_next;
  }
}

TEST(Exploration, EpsilonGreedyMixesAtTheConfiguredRate) {
  TabularMdp m = testutil::make_shell(1, 4, 0.9);
  ActionValueTable values(1, 4);
  values.at(0, 2) = -1.0;  // greedy action

  ExplorationStream stream(eps_greedy(0.1), m, 0);
  glearn::RngStream rng(31);
  const int total = 200000;
  int greedy = 0;
  for (int i = 0; i < total; ++i) {
    if (stream.next(values, rng).a == 2) ++greedy;
  }
  // P(a == 2) = 0.9 + 0.1/4; three sigma of the binomial is about 0.002.
  const double rate = static_cast<double>(greedy) / total;
  EXPECT_NEAR(rate, 0.925, 0.003);
}

TEST(Exploration, TerminalTransitionResetsToTheStart) {
  // start 0 -> 1 -> 2(terminal), single action.
  TabularMdp m = testutil::make_shell(3, 1, 0.9);
  m.terminal[2] = 1;
  m.row(0, 0)[0] = 0.0;
  m.row(0, 0)[1] = 1.0;
  m.row(1, 0)[1] = 0.0;
  m.row(1, 0)[2] = 1.0;

  ExplorationStream stream(eps_greedy(0.0), m, 0);
  const ActionValueTable values(3, 1);
  glearn::RngStream rng(3);
  const int expected[6] = {0, 1, 0, 1, 0, 1};
  for (int i = 0; i < 6; ++i) {
    const auto x = stream.next(values, rng);
    EXPECT_EQ(x.s, expected[i]);
    EXPECT_EQ(x.terminal, x.s == 1);
  }
}

TEST(Exploration, CliffFallRestartsTheWalk) {
  const glearn::BuiltDomain d = glearn::build_cliff(
      glearn::load_map(std::string(GLEARN_SOURCE_DIR) + "/maps/cliff12x4.map"));
  ExplorationStream stream(eps_greedy(1.0), d.mdp, d.start_state);
  const ActionValueTable values(d.mdp.n_states, d.mdp.n_actions);
  glearn::RngStream rng(88);

  bool saw_fall = false;
  for (int i = 0; i < 5000; ++i) {
    const auto x = stream.next(values, rng);
    EXPECT_FALSE(x.terminal);
    if (x.cost == 5.0) {
      EXPECT_EQ(x.s_next, d.start_state);
      EXPECT_EQ(stream.current_state(), d.start_state);
      saw_fall = true;
    }
  }
  EXPECT_TRUE(saw_fall);
}

TEST(Exploration, RejectsBadConstruction) {
  TabularMdp all_terminal = testutil::make_shell(1, 1, 0.9);
  all_terminal.terminal[0] = 1;
  EXPECT_THROW(ExplorationStream(uniform_iid(), all_terminal),
               std::invalid_argument);

  const TabularMdp m = testutil::make_shell(2, 1, 0.9);
  EXPECT_THROW(ExplorationStream(eps_greedy(2.0), m), std::invalid_argument);
  EXPECT_THROW(ExplorationStream(eps_greedy(0.1), m, 5), std::out_of_range);
}
