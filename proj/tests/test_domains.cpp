#include "glearn/domains.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glearn/mdp.hpp"
#include "glearn/rng.hpp"
#include "test_util.hpp"

using glearn::BuiltDomain;
using glearn::Cell;
using glearn::CostVariant;
using glearn::DomainError;
using glearn::GridMap;

namespace {

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    return e.what();
  }
  return "";
}

double row_sum(std::span<const double> row) {
  double s = 0.0;
  for (double p : row) s += p;
  return s;
}

// State index of cell (r, c); the cell must be a state.
int sid(const BuiltDomain& d, int r, int c) {
  const int s = d.state_of_cell[static_cast<std::size_t>(r) * d.map.width + c];
  EXPECT_GE(s, 0) << "cell (" << r << "," << c << ") is not a state";
  return s;
}

BuiltDomain grid_fixed(const std::string& text, std::uint64_t seed = 7) {
  glearn::RngStream rng(seed);
  return glearn::build_gridworld(glearn::parse_map(text), CostVariant{}, rng);
}

}  // namespace

TEST(Maps, ParseSmall) {
  const GridMap map = glearn::parse_map("G.\n..\n");
  EXPECT_EQ(map.width, 2);
  EXPECT_EQ(map.height, 2);
  EXPECT_EQ(map.at(0, 0), Cell::Goal);
  EXPECT_EQ(map.at(0, 1), Cell::Free);
  EXPECT_EQ(map.at(1, 0), Cell::Free);
}

TEST(Maps, ParseStripsCarriageReturnsAndTrailingBlankLines) {
  const GridMap map = glearn::parse_map("G.\r\n..\r\n\n");
  EXPECT_EQ(map.width, 2);
  EXPECT_EQ(map.height, 2);
}

TEST(Maps, ParseRejectsRaggedLines) {
  const std::string msg =
      thrown_message([] { glearn::parse_map("G.\n...\n"); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("expected width 2, got 3"), std::string::npos) << msg;
}

TEST(Maps, ParseRejectsUnknownCell) {
  const std::string msg =
      thrown_message([] { glearn::parse_map("G.\n.x\n"); });
  EXPECT_NE(msg.find("line 2, column 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown cell 'x'"), std::string::npos) << msg;
}

TEST(Maps, ParseRejectsWrongGoalCount) {
  EXPECT_THROW(glearn::parse_map("..\n..\n"), DomainError);
  EXPECT_THROW(glearn::parse_map("GG\n"), DomainError);
  EXPECT_NE(thrown_message([] { glearn::parse_map("..\n"); }).find("no goal"),
            std::string::npos);
}

TEST(Maps, ParseRejectsDisconnectedMaps) {
  const std::string msg =
      thrown_message([] { glearn::parse_map("G#\n#.\n"); });
  EXPECT_NE(msg.find("not connected"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2, column 2"), std::string::npos) << msg;
}

TEST(Maps, LoadRejectsMissingFile) {
  EXPECT_THROW(glearn::load_map("/nonexistent/none.map"), DomainError);
}

TEST(Maps, ShippedGridworldLoadsAndValidates) {
  const GridMap map = glearn::load_map(std::string(GLEARN_SOURCE_DIR) +
                                       "/maps/gridworld8.map");
  EXPECT_EQ(map.width, 8);
  EXPECT_EQ(map.height, 8);
  glearn::RngStream rng(3);
  const BuiltDomain d = glearn::build_gridworld(map, CostVariant{}, rng);
  EXPECT_EQ(d.mdp.n_states, 53);
  EXPECT_EQ(d.mdp.n_actions, 9);
  EXPECT_GE(d.goal_state, 0);
  EXPECT_TRUE(d.mdp.is_terminal(d.goal_state));
  EXPECT_TRUE(glearn::validate_mdp(d.mdp).ok());
}

TEST(Maps, ShippedCliffLoadsAndValidates) {
  const GridMap map =
      glearn::load_map(std::string(GLEARN_SOURCE_DIR) + "/maps/cliff12x4.map");
  EXPECT_EQ(map.width, 12);
  EXPECT_EQ(map.height, 4);
  const BuiltDomain d = glearn::build_cliff(map);
  EXPECT_EQ(d.mdp.n_states, 37);
  EXPECT_EQ(d.mdp.n_actions, 4);
  EXPECT_EQ(d.start_state, sid(d, 3, 0));
  EXPECT_TRUE(glearn::validate_mdp(d.mdp).ok());
  for (int s = 0; s < d.mdp.n_states; ++s) EXPECT_FALSE(d.mdp.is_terminal(s));
}

TEST(Gridworld, SlideMassesInOpenSpace) {
  const BuiltDomain d = grid_fixed("G....\n.....\n.....\n.....\n.....\n");
  const int center = sid(d, 2, 2);
  const auto row = d.mdp.row(center, 4);  // stay
  EXPECT_DOUBLE_EQ(row[sid(d, 1, 2)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 3, 2)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 2, 1)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 2, 3)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 1, 1)], 1.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 1, 3)], 1.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 3, 1)], 1.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 3, 3)], 1.0 / 20.0);
  // The stay entry is the renormalization pivot, so it carries the fold
  // residual of the eight exact slide masses.
  EXPECT_NEAR(row[center], 4.0 / 20.0, 1e-14);
  EXPECT_EQ(row_sum(row), 1.0);
}

TEST(Gridworld, MoveTargetsOffsetSquareAndSlidesAcrossGoal) {
  const BuiltDomain d = grid_fixed("G....\n.....\n.....\n.....\n.....\n");
  // Up-left from the center targets (1,1); the goal is its diagonal neighbor.
  const auto row = d.mdp.row(sid(d, 2, 2), 0);
  EXPECT_NEAR(row[sid(d, 1, 1)], 4.0 / 20.0, 1e-14);
  EXPECT_DOUBLE_EQ(row[sid(d, 0, 1)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 0, 0)], 1.0 / 20.0);
  EXPECT_EQ(row_sum(row), 1.0);
}

TEST(Gridworld, EdgeMoveIsBlockedAndLosesOffMapSlides) {
  const BuiltDomain d = grid_fixed("G....\n.....\n.....\n.....\n.....\n");
  // Up from the top-right corner is off the map, so the target is the corner
  // itself; only (0,3), (1,4), and (1,3) remain as slide destinations.
  const int corner = sid(d, 0, 4);
  const auto row = d.mdp.row(corner, 1);
  EXPECT_DOUBLE_EQ(row[sid(d, 0, 3)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 1, 4)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 1, 3)], 1.0 / 20.0);
  EXPECT_NEAR(row[corner], 13.0 / 20.0, 1e-14);
  EXPECT_EQ(row_sum(row), 1.0);
}

TEST(Gridworld, WallsBlockBothMovesAndSlides) {
  const BuiltDomain d = grid_fixed("G#.\n.#.\n...\n");
  // Right from (1,0) hits the wall, so the target stays (1,0); the wall and
  // the map edge also remove most slide destinations.
  const int s = sid(d, 1, 0);
  const auto row = d.mdp.row(s, 5);
  EXPECT_DOUBLE_EQ(row[sid(d, 0, 0)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 2, 0)], 3.0 / 20.0);
  EXPECT_DOUBLE_EQ(row[sid(d, 2, 1)], 1.0 / 20.0);
  EXPECT_NEAR(row[s], 13.0 / 20.0, 1e-14);
  EXPECT_EQ(row_sum(row), 1.0);
}

TEST(Gridworld, AllRowsSumToOneExactly) {
  glearn::RngStream rng(11);
  const BuiltDomain d = glearn::build_gridworld(
      glearn::load_map(std::string(GLEARN_SOURCE_DIR) + "/maps/gridworld8.map"),
      CostVariant{}, rng);
  for (int s = 0; s < d.mdp.n_states; ++s)
    for (int a = 0; a < d.mdp.n_actions; ++a)
      EXPECT_EQ(row_sum(d.mdp.row(s, a)), 1.0) << "s=" << s << " a=" << a;
}

TEST(Gridworld, GoalIsAbsorbingWithZeroCost) {
  const BuiltDomain d = grid_fixed("G.\n..\n");
  const int g = d.goal_state;
  ASSERT_GE(g, 0);
  EXPECT_TRUE(d.mdp.is_terminal(g));
  for (int a = 0; a < d.mdp.n_actions; ++a) {
    EXPECT_EQ(d.mdp.row(g, a)[g], 1.0);
    EXPECT_EQ(d.mdp.cost_at(g, a).mean, 0.0);
    EXPECT_EQ(d.mdp.cost_at(g, a).std, 0.0);
  }
}

TEST(Gridworld, SingleGoalCellMapBuilds) {
  const BuiltDomain d = grid_fixed("G\n");
  EXPECT_EQ(d.mdp.n_states, 1);
  EXPECT_TRUE(d.mdp.is_terminal(0));
  EXPECT_EQ(d.mdp.row(0, 0)[0], 1.0);
  EXPECT_TRUE(glearn::validate_mdp(d.mdp).ok());
}

TEST(Gridworld, FixedAndGaussianCosts) {
  const BuiltDomain fixed = grid_fixed("G.\n..\n");
  for (int s = 0; s < fixed.mdp.n_states; ++s) {
    if (fixed.mdp.is_terminal(s)) continue;
    for (int a = 0; a < fixed.mdp.n_actions; ++a) {
      EXPECT_EQ(fixed.mdp.cost_at(s, a).mean, 1.0);
      EXPECT_EQ(fixed.mdp.cost_at(s, a).std, 0.0);
    }
  }
  CostVariant noisy;
  noisy.kind = CostVariant::GaussianUnit;
  noisy.std = 2.5;
  glearn::RngStream rng(5);
  const BuiltDomain d =
      glearn::build_gridworld(glearn::parse_map("G.\n..\n"), noisy, rng);
  for (int s = 0; s < d.mdp.n_states; ++s) {
    if (d.mdp.is_terminal(s)) continue;
    for (int a = 0; a < d.mdp.n_actions; ++a) {
      EXPECT_EQ(d.mdp.cost_at(s, a).mean, 1.0);
      EXPECT_EQ(d.mdp.cost_at(s, a).std, 2.5);
    }
  }
}

TEST(Gridworld, GeneratedMeansAreSeedDeterministic) {
  CostVariant gen;
  gen.kind = CostVariant::GeneratedMeans;
  gen.std = 4.0;
  const auto build = [&gen](std::uint64_t seed) {
    glearn::RngStream rng(seed);
    return glearn::build_gridworld(glearn::parse_map("G.\n..\n"), gen, rng);
  };
  const BuiltDomain a = build(42);
  const BuiltDomain b = build(42);
  const BuiltDomain c = build(43);
  bool any_diff = false;
  for (int s = 0; s < a.mdp.n_states; ++s) {
    for (int act = 0; act < a.mdp.n_actions; ++act) {
      EXPECT_EQ(a.mdp.cost_at(s, act).mean, b.mdp.cost_at(s, act).mean);
      if (a.mdp.cost_at(s, act).mean != c.mdp.cost_at(s, act).mean)
        any_diff = true;
      if (!a.mdp.is_terminal(s)) {
        EXPECT_EQ(a.mdp.cost_at(s, act).std, 4.0);
        EXPECT_GE(a.mdp.cost_at(s, act).mean, 1.0);
        EXPECT_LE(a.mdp.cost_at(s, act).mean, 3.0);
      }
    }
  }
  EXPECT_TRUE(any_diff);
}

TEST(Gridworld, GeneratedMeansAreUniform) {
  CostVariant gen;
  gen.kind = CostVariant::GeneratedMeans;
  const GridMap map = glearn::parse_map("G.\n..\n");
  std::vector<double> samples;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    glearn::RngStream rng(glearn::derive_seed(99, static_cast<int>(seed),
                                              "gen-uniformity"));
    const BuiltDomain d = glearn::build_gridworld(map, gen, rng);
    for (int s = 0; s < d.mdp.n_states; ++s) {
      if (d.mdp.is_terminal(s)) continue;
      for (int a = 0; a < d.mdp.n_actions; ++a)
        samples.push_back(d.mdp.cost_at(s, a).mean);
    }
  }
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  double d_stat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = (samples[i] - 1.0) / 2.0;
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d_stat = std::max({d_stat, std::abs(cdf - lo), std::abs(cdf - hi)});
  }
  EXPECT_LT(d_stat, testutil::ks_critical(n));
}

TEST(Gridworld, RejectsCliffCells) {
  glearn::RngStream rng(1);
  const GridMap map = glearn::parse_map("G.\nC.\n");
  const std::string msg = thrown_message(
      [&] { glearn::build_gridworld(map, CostVariant{}, rng); });
  EXPECT_NE(msg.find("cliff cell not allowed"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2, column 1"), std::string::npos) << msg;
}

TEST(Cliff, StepCostsAndRedirects) {
  const BuiltDomain d = glearn::build_cliff(
      glearn::load_map(std::string(GLEARN_SOURCE_DIR) + "/maps/cliff12x4.map"));
  const glearn::TabularMdp& m = d.mdp;
  const int start = d.start_state;

  // Stepping onto a cliff cell redirects to the start at cost 5.
  const int above_cliff = sid(d, 2, 5);
  EXPECT_EQ(m.row(above_cliff, 2)[start], 1.0);
  EXPECT_EQ(m.cost_at(above_cliff, 2).mean, 5.0);

  // Reaching the goal also restarts, at cost 0.
  const int above_goal = sid(d, 2, 11);
  EXPECT_EQ(m.row(above_goal, 2)[start], 1.0);
  EXPECT_EQ(m.cost_at(above_goal, 2).mean, 0.0);

  // Ordinary move.
  EXPECT_EQ(m.row(sid(d, 0, 0), 1)[sid(d, 0, 1)], 1.0);
  EXPECT_EQ(m.cost_at(sid(d, 0, 0), 1).mean, 1.0);

  // Blocked moves stay put at cost 1: off the top, and off the left edge
  // from the start square.
  EXPECT_EQ(m.row(sid(d, 0, 3), 0)[sid(d, 0, 3)], 1.0);
  EXPECT_EQ(m.cost_at(sid(d, 0, 3), 0).mean, 1.0);
  EXPECT_EQ(m.row(start, 3)[start], 1.0);
  EXPECT_EQ(m.cost_at(start, 3).mean, 1.0);

  // The first cliff cell is directly right of the start.
  EXPECT_EQ(m.row(start, 1)[start], 1.0);
  EXPECT_EQ(m.cost_at(start, 1).mean, 5.0);

  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      const auto row = m.row(s, a);
      EXPECT_EQ(std::count(row.begin(), row.end(), 1.0), 1);
      EXPECT_EQ(row_sum(row), 1.0);
      EXPECT_EQ(m.cost_at(s, a).std, 0.0);
    }
  }
}

TEST(Cliff, RejectsMalformedMaps) {
  EXPECT_NE(thrown_message([] {
              glearn::build_cliff(glearn::parse_map(".C\n.G\n"));
            }).find("no start"),
            std::string::npos);
  EXPECT_NE(thrown_message([] {
              glearn::build_cliff(glearn::parse_map("S.\n.G\n"));
            }).find("no cliff"),
            std::string::npos);
}
