#include "glearn/domains.hpp"

#include <fstream>
#include <queue>
#include <sstream>

namespace glearn {
namespace {

std::string cell_pos(int r, int c) {
  std::ostringstream os;
  os << "line " << r + 1 << ", column " << c + 1;
  return os.str();
}

bool is_walkable(Cell c) { return c != Cell::Wall; }

}  // namespace

GridMap parse_map(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  for (auto& line : lines)
    while (!line.empty() && line.back() == '\r') line.pop_back();
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.empty()) throw DomainError("map is empty");

  GridMap map;
  map.height = static_cast<int>(lines.size());
  map.width = static_cast<int>(lines[0].size());
  if (map.width == 0) throw DomainError("map is empty");
  map.cells.reserve(static_cast<std::size_t>(map.width) * map.height);

  int goals = 0;
  for (int r = 0; r < map.height; ++r) {
    const std::string& line = lines[r];
    if (static_cast<int>(line.size()) != map.width) {
      std::ostringstream os;
      os << "line " << r + 1 << ": expected width " << map.width << ", got "
         << line.size();
      throw DomainError(os.str());
    }
    for (int c = 0; c < map.width; ++c) {
      const char ch = line[c];
      switch (ch) {
        case '.':
        case '#':
        case 'G':
        case 'S':
        case 'C':
          map.cells.push_back(static_cast<Cell>(ch));
          break;
        default: {
          std::ostringstream os;
          os << cell_pos(r, c) << ": unknown cell '" << ch << "'";
          throw DomainError(os.str());
        }
      }
      if (ch == 'G') ++goals;
    }
  }

  if (goals == 0) throw DomainError("map has no goal");
  if (goals > 1) throw DomainError("map has multiple goals");

  // Reachability over 4-neighbor moves between walkable cells.
  const int n = map.width * map.height;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int first = -1;
  int walkable = 0;
  for (int i = 0; i < n; ++i) {
    if (is_walkable(map.cells[i])) {
      ++walkable;
      if (first < 0) first = i;
    }
  }
  std::queue<int> frontier;
  frontier.push(first);
  seen[first] = 1;
  int reached = 1;
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    const int r = i / map.width;
    const int c = i % map.width;
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k];
      const int nc = c + dc[k];
      if (!map.in_bounds(nr, nc)) continue;
      const int j = nr * map.width + nc;
      if (seen[j] || !is_walkable(map.cells[j])) continue;
      seen[j] = 1;
      ++reached;
      frontier.push(j);
    }
  }
  if (reached != walkable) {
    for (int i = 0; i < n; ++i) {
      if (is_walkable(map.cells[i]) && !seen[i]) {
        std::ostringstream os;
        os << "map is not connected: " << cell_pos(i / map.width, i % map.width)
           << " is unreachable";
        throw DomainError(os.str());
      }
    }
  }
  return map;
}

GridMap load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open map file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_map(os.str());
}

BuiltDomain build_gridworld(const GridMap& map, const CostVariant& variant,
                            RngStream& gen_rng, double gamma) {
  BuiltDomain d;
  d.map = map;
  d.state_of_cell.assign(
      static_cast<std::size_t>(map.width) * map.height, -1);

  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const Cell cell = map.at(r, c);
      if (cell == Cell::Cliff)
        throw DomainError("cliff cell not allowed here: " + cell_pos(r, c));
      if (cell == Cell::Wall) continue;
      const int cell_idx = r * map.width + c;
      d.state_of_cell[cell_idx] = static_cast<int>(d.cell_of_state.size());
      d.cell_of_state.push_back(cell_idx);
      if (cell == Cell::Goal) d.goal_state = d.state_of_cell[cell_idx];
      if (cell == Cell::Start) d.start_state = d.state_of_cell[cell_idx];
    }
  }

  TabularMdp& m = d.mdp;
  m.n_states = static_cast<int>(d.cell_of_state.size());
  m.n_actions = kGridworldActions;
  m.gamma = gamma;
  m.transition.assign(static_cast<std::size_t>(m.n_states) * m.n_actions *
                          m.n_states,
                      0.0);
  m.cost.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, {});
  m.terminal.assign(static_cast<std::size_t>(m.n_states), 0);

  std::vector<int> twentieths(static_cast<std::size_t>(m.n_states));
  for (int s = 0; s < m.n_states; ++s) {
    const int cell_idx = d.cell_of_state[s];
    const int r = cell_idx / map.width;
    const int c = cell_idx % map.width;

    if (s == d.goal_state) {
      m.terminal[s] = 1;
      for (int a = 0; a < m.n_actions; ++a) {
        m.row(s, a)[s] = 1.0;
        m.cost_at(s, a) = {0.0, 0.0};
      }
      continue;
    }

    for (int a = 0; a < m.n_actions; ++a) {
      // Actions index the 3x3 offset neighborhood row-major; 4 is stay.
      int tr = r + a / 3 - 1;
      int tc = c + a % 3 - 1;
      if (!map.in_bounds(tr, tc) || map.at(tr, tc) == Cell::Wall) {
        tr = r;
        tc = c;
      }
      const int target_state = d.state_of_cell[tr * map.width + tc];

      // Slide masses in twentieths: 3/20 per available 4-neighbor of the
      // target, 1/20 per available diagonal, rest stays on the target.
      std::fill(twentieths.begin(), twentieths.end(), 0);
      int moved = 0;
      for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        const int nr = tr + k / 3 - 1;
        const int nc = tc + k % 3 - 1;
        if (!map.in_bounds(nr, nc) || map.at(nr, nc) == Cell::Wall) continue;
        const bool orth = (k == 1 || k == 3 || k == 5 || k == 7);
        const int w = orth ? 3 : 1;
        twentieths[static_cast<std::size_t>(
            d.state_of_cell[nr * map.width + nc])] += w;
        moved += w;
      }
      twentieths[static_cast<std::size_t>(target_state)] += 20 - moved;

      auto row = m.row(s, a);
      for (int t = 0; t < m.n_states; ++t)
        row[t] = static_cast<double>(twentieths[static_cast<std::size_t>(t)]) /
                 20.0;
      renormalize_exact(row, static_cast<std::size_t>(target_state));

      switch (variant.kind) {
        case CostVariant::FixedUnit:
          m.cost_at(s, a) = {1.0, 0.0};
          break;
        case CostVariant::GaussianUnit:
          m.cost_at(s, a) = {1.0, variant.std};
          break;
        case CostVariant::GeneratedMeans:
          m.cost_at(s, a) = {
              variant.mean_low +
                  (variant.mean_high - variant.mean_low) * gen_rng.uniform01(),
              variant.std};
          break;
      }
    }
  }
  return d;
}

BuiltDomain build_cliff(const GridMap& map, double gamma) {
  BuiltDomain d;
  d.map = map;
  d.state_of_cell.assign(
      static_cast<std::size_t>(map.width) * map.height, -1);

  int start_cell = -1;
  int starts = 0;
  int cliffs = 0;
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const Cell cell = map.at(r, c);
      const int cell_idx = r * map.width + c;
      if (cell == Cell::Start) {
        ++starts;
        start_cell = cell_idx;
      }
      if (cell == Cell::Cliff) ++cliffs;
      if (cell == Cell::Free || cell == Cell::Start) {
        d.state_of_cell[cell_idx] = static_cast<int>(d.cell_of_state.size());
        d.cell_of_state.push_back(cell_idx);
      }
    }
  }
  if (starts == 0) throw DomainError("map has no start");
  if (starts > 1) throw DomainError("map has multiple starts");
  if (cliffs == 0) throw DomainError("map has no cliff cells");
  d.start_state = d.state_of_cell[start_cell];

  TabularMdp& m = d.mdp;
  m.n_states = static_cast<int>(d.cell_of_state.size());
  m.n_actions = kCliffActions;
  m.gamma = gamma;
  m.transition.assign(static_cast<std::size_t>(m.n_states) * m.n_actions *
                          m.n_states,
                      0.0);
  m.cost.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, {});
  m.terminal.assign(static_cast<std::size_t>(m.n_states), 0);

  // up, right, down, left
  const int dr[kCliffActions] = {-1, 0, 1, 0};
  const int dc[kCliffActions] = {0, 1, 0, -1};

  for (int s = 0; s < m.n_states; ++s) {
    const int cell_idx = d.cell_of_state[s];
    const int r = cell_idx / map.width;
    const int c = cell_idx % map.width;
    for (int a = 0; a < m.n_actions; ++a) {
      const int tr = r + dr[a];
      const int tc = c + dc[a];
      int next = s;
      double cost = 1.0;
      if (map.in_bounds(tr, tc) && map.at(tr, tc) != Cell::Wall) {
        const Cell target = map.at(tr, tc);
        if (target == Cell::Cliff) {
          next = d.start_state;
          cost = 5.0;
        } else if (target == Cell::Goal) {
          next = d.start_state;
          cost = 0.0;
        } else {
          next = d.state_of_cell[tr * map.width + tc];
        }
      }
      m.row(s, a)[next] = 1.0;
      m.cost_at(s, a) = {cost, 0.0};
    }
  }
  return d;
}

}  // namespace glearn
