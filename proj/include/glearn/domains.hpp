#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "glearn/mdp.hpp"
#include "glearn/rng.hpp"

namespace glearn {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Cell : char {
  Free = '.',
  Wall = '#',
  Goal = 'G',
  Start = 'S',
  Cliff = 'C',
};

// ASCII occupancy grid. Row 0 is the top line of the file.
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;  // row-major

  Cell at(int r, int c) const { return cells[static_cast<std::size_t>(r) * width + c]; }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
};

// Parses a map and checks it structurally: rectangular, known characters
// only, exactly one goal, and all non-wall cells mutually reachable through
// 4-neighbor moves. Errors carry 1-based line/column positions.
GridMap parse_map(const std::string& text);
GridMap load_map(const std::string& path);

struct CostVariant {
  enum Kind {
    FixedUnit,       // every non-terminal (s,a) costs exactly 1
    GaussianUnit,    // mean 1 with configurable noise
    GeneratedMeans,  // mean drawn once per (s,a) from U[mean_low, mean_high]
  };
  Kind kind = FixedUnit;
  double std = 0.0;  // GaussianUnit / GeneratedMeans noise level
  double mean_low = 1.0;
  double mean_high = 3.0;
};

// A built benchmark: the MDP plus the cell <-> state correspondence.
struct BuiltDomain {
  TabularMdp mdp;
  GridMap map;
  std::vector<int> state_of_cell;  // -1 for cells that are not states
  std::vector<int> cell_of_state;  // row-major cell index per state
  int start_state = -1;            // cliff only
  int goal_state = -1;             // gridworld only
};

// King-move gridworld: 9 actions (8 compass moves plus stay, row-major order
// over the 3x3 offset neighborhood, index 4 = stay). A move into a wall or
// off the map targets the current square. From the targeted square the agent
// slides: probability 0.15 onto each available 4-neighbor, 0.05 onto each
// available diagonal neighbor, remainder staying put. The goal is absorbing
// with zero cost. GeneratedMeans draws one mean per non-terminal (s,a), in
// ascending (s,a) order, from gen_rng.
BuiltDomain build_gridworld(const GridMap& map, const CostVariant& variant,
                            RngStream& gen_rng, double gamma = 0.95);

// Deterministic cliff walk: 4 actions (up, right, down, left). Cliff and
// goal cells are not states; stepping onto them redirects to the start with
// cost 5 (cliff) or 0 (goal). Every other step, including blocked moves,
// costs 1. There are no terminal states.
BuiltDomain build_cliff(const GridMap& map, double gamma = 0.95);

inline constexpr int kGridworldActions = 9;
inline constexpr int kCliffActions = 4;

}  // namespace glearn
