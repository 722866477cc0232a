#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "mitlgame/dsg.hpp"
#include "mitlgame/fsc.hpp"
#include "mitlgame/game.hpp"
#include "mitlgame/product.hpp"
#include "mitlgame/tba.hpp"

namespace mitlgame {

struct GdsgOptions {
  std::int64_t kappa_max = 2;              // timestamp shift budget
  std::int64_t fsc_size = 0;               // estimate values per clock; 0 = the full valuation grid
  std::optional<double> detect_threshold = 2.0;  // nullopt disables detection
  unsigned threads = 1;
};

struct GlobalState {
  std::size_t p = 0;        // product state
  Valuation lambda;         // controller estimate
  bool detected = false;    // hypothesis bit, latched
  friend auto operator<=>(const GlobalState&, const GlobalState&) = default;
};

struct AdversaryColumn {
  std::size_t ua = 0;       // local adversary action
  Valuation observed;       // valuation shown to the defender
  bool detect = false;      // the observation trips detection
};

// Global game. Row r at a state is the local defender action r of its DSG
// state; columns are (uA, manipulated valuation) pairs under H0 and uA alone
// under H1. A column that trips detection moves to the H1 twin with
// probability 1 regardless of the row.
struct GlobalGame {
  Game game;
  std::vector<GlobalState> states;
  std::vector<std::vector<AdversaryColumn>> columns;
  std::int64_t lambda_cap = 0;
  std::int64_t valuation_cap = 0;
  GdsgOptions options;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::int64_t> duration_estimate;
};

// Pairs (uA, v'') with v'' = clamp(v + k, 0, cap) for |k| <= kappa_max, one
// common shift for all clocks, deduplicated; ordered by uA, then |k|, then v''.
std::vector<std::pair<std::size_t, Valuation>> enumerate_adversary_choices(const Valuation& v, std::int64_t cap,
                                                                           std::int64_t kappa_max, std::size_t na);

// Expected duration of (s, c, s') averaged over adversary actions that reach
// s', rounded to the tick grid; exact halves go towards the mode.
std::int64_t expected_duration(const Dsg& g, std::size_t s, std::size_t c, std::size_t s2);

GlobalGame build_global(const ProductGame& p, const Dsg& g, const TimedBuchiAutomaton& a, const GdsgOptions& opt);

}  // namespace mitlgame
