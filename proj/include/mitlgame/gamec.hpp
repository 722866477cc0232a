#pragma once

#include <vector>

#include "mitlgame/game.hpp"

namespace mitlgame {

// A sub-game: states N with, per state of N, the retained defender rows.
// Every retained row keeps all successors inside N under every column.
struct SubGame {
  std::vector<std::size_t> states;               // ascending
  std::vector<std::vector<std::size_t>> rows;    // rows[i] for states[i], ascending
  friend bool operator==(const SubGame&, const SubGame&) = default;
};

struct GamecSet {
  std::vector<SubGame> components;  // ordered by smallest state
  std::vector<bool> in_union(std::size_t n) const;
};

// Rows of s whose successors stay in `member` under every column.
std::vector<std::size_t> robust_rows(const Game& z, std::size_t s, const std::vector<bool>& member);

// Tarjan SCCs of an adjacency list; components listed in discovery order.
std::vector<std::vector<std::size_t>> strongly_connected_components(const std::vector<std::vector<std::size_t>>& adj);

// Maximal generalized end components intersecting the accepting set.
GamecSet compute_gamecs(const Game& z);

// Maximal generalized end components regardless of acceptance.
GamecSet compute_gmecs(const Game& z);

}  // namespace mitlgame
