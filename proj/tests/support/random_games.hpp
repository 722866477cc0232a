#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mitlgame/dsg.hpp"
#include "mitlgame/game.hpp"
#include "mitlgame/mitl.hpp"

namespace testsupport {

struct GameShape {
  std::size_t min_states = 1, max_states = 8;
  std::size_t max_rows = 3, max_cols = 3;
  std::size_t max_successors = 3;
  double accepting_probability = 0.3;
  bool turn_based = false;  // every state has a single row or a single column
  bool exact_rows = false;  // every state has exactly max_rows rows and max_cols columns (before turn_based)
  // The last two states become absorbing: an accepting goal and a losing trap.
  // Values are then fractional instead of mostly 0 or 1. Needs min_states >= 3.
  bool absorbing_ends = false;
};

mitlgame::Game random_game(std::mt19937_64& rng, const GameShape& shape);

// Random distribution over [0, n) with dyadic weights.
std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n);

// Random explicit DSG over propositions {p, q} with durations 1..3.
mitlgame::Dsg random_dsg(std::mt19937_64& rng, std::size_t states, std::size_t nc, std::size_t na);

// Formula in the bounded fragment over `props`: a conjunction of one or two
// possibly negated U/F/G operators with Boolean operands.
mitlgame::FormulaPtr random_fragment_formula(std::mt19937_64& rng, const std::vector<std::string>& props);

// Timed word with strictly increasing times (positive multiples of 1/2)
// and horizon at or after the last time.
mitlgame::TimedWord random_word(std::mt19937_64& rng, const std::vector<std::string>& props, std::int64_t max_time);

}  // namespace testsupport
