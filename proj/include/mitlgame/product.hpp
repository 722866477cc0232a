#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mitlgame/dsg.hpp"
#include "mitlgame/tba.hpp"

namespace mitlgame {

struct ProductState {
  std::int64_t s = 0;               // DSG state; -1 marks the violation sink
  std::size_t q = 0;                // automaton state
  std::vector<std::int64_t> v;      // saturated integer valuation
  bool violation() const { return s < 0; }
  friend auto operator<=>(const ProductState&, const ProductState&) = default;
};

using Row = std::vector<std::pair<std::size_t, double>>;  // (successor, probability), ascending successor

// States are sorted by (s, q, v); the violation sink, when present, is last.
struct ProductGame {
  std::vector<ProductState> states;
  std::size_t initial = 0;
  std::vector<bool> accepting;
  std::vector<std::size_t> nc, na;   // local action counts per state (1 x 1 for the sink)
  std::vector<std::vector<Row>> kernel;  // kernel[i][c * na[i] + a]
  std::int64_t cap = 1;              // valuation saturation value
  std::size_t violation = static_cast<std::size_t>(-1);  // index of the sink, if reachable

  const Row& row(std::size_t i, std::size_t c, std::size_t a) const { return kernel[i][c * na[i] + a]; }
  std::string name(std::size_t i, const Dsg& g, const TimedBuchiAutomaton& a) const;
};

// Maps a DSG label onto the automaton's propositions. Throws
// Error(Validation, "AlphabetMismatch") when the automaton reads a proposition
// the game does not declare.
std::vector<std::size_t> alphabet_map(const Dsg& g, const TimedBuchiAutomaton& a);
std::uint64_t automaton_letter(std::uint64_t label, const std::vector<std::size_t>& map);

// Reachable product from (s0, q0, 0). Mass of transitions that enable no
// automaton edge goes to the absorbing non-accepting violation sink.
ProductGame build_product(const Dsg& g, const TimedBuchiAutomaton& a);

// Projections of a product run.
std::vector<std::pair<std::int64_t, std::size_t>> untime(const std::vector<ProductState>& run);
std::vector<std::pair<std::size_t, std::vector<std::int64_t>>> time_projection(const std::vector<ProductState>& run);

}  // namespace mitlgame
