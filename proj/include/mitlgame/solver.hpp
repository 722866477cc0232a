#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mitlgame/fsc.hpp"
#include "mitlgame/game.hpp"
#include "mitlgame/gamec.hpp"
#include "mitlgame/gdsg.hpp"
#include "mitlgame/lp.hpp"
#include "mitlgame/product.hpp"
#include "mitlgame/tba.hpp"

namespace mitlgame {

// Which states are held at value 1: the union of accepting end components
// (default) or the accepting states themselves.
enum class TargetMode { GamecUnion, Accepting };

std::vector<bool> reachability_targets(const Game& z, TargetMode mode);
std::vector<bool> reachability_targets(const GamecSet& gamecs, std::size_t n);

// States with a path to some target in the underlying graph (any row, any column).
std::vector<bool> can_reach(const Game& z, const std::vector<bool>& target);

// M[r][c] = sum over successors of probability * q(successor).
Matrix payoff_matrix(const Game& z, std::size_t s, const std::vector<double>& q);

// Column indices of s with pairwise distinct block signatures, first occurrence kept.
std::vector<std::size_t> distinct_columns(const Game& z, std::size_t s);

// One application of the max-min operator. Targets stay at 1, states that
// cannot reach a target stay at 0.
std::vector<double> bellman_update(const Game& z, const std::vector<bool>& target, const std::vector<double>& q,
                                   unsigned threads = 1);

struct ViOptions {
  double epsilon = 1e-6;
  TargetMode target = TargetMode::GamecUnion;
  unsigned threads = 1;
  std::optional<std::vector<double>> initial;  // off-target start values; zeros when absent
  std::size_t max_iterations = 0;              // 0 means 10 |S| / epsilon
};

struct ViResult {
  std::vector<double> q;
  std::vector<bool> target;
  std::size_t iterations = 0;
  std::vector<double> trace;  // sup-norm change per sweep
  bool monotone = true;       // every sweep non-decreasing entrywise (1e-9 slack)
  bool bounded = true;        // every iterate inside [0, 1] (1e-9 slack)
};

// Synchronous sweeps until the sup-norm change is at most epsilon. Throws
// Error(Runtime, "IterationCap") when the cap is reached first.
ViResult value_iteration(const Game& z, const ViOptions& opt);
ViResult value_iteration(const Game& z, const std::vector<bool>& target, const ViOptions& opt);

// Fixed defender behaviour. At state s under column c the defender plays
// dist[s][which[s][c]], a distribution over the rows of s. The indirection
// lets the played row depend on what the column shows the defender.
struct FixedDefender {
  std::vector<std::vector<std::vector<double>>> dist;
  std::vector<std::vector<std::uint32_t>> which;
};
FixedDefender fixed_rows(const Game& z, const std::vector<std::vector<double>>& rows);

using ColumnPolicy = std::vector<std::size_t>;  // one adversary column per state

// Fixed-defender operator: the adversary minimizes over columns, or plays
// `adversary` when given.
std::vector<double> apply_fixed_policy(const Game& z, const std::vector<bool>& target, const FixedDefender& mu,
                                       const std::optional<ColumnPolicy>& adversary, const std::vector<double>& q);

// Least fixpoint of apply_fixed_policy from the zero-off-target start,
// iterated until the sup-norm change is at most tol.
std::vector<double> fixed_policy_values(const Game& z, const std::vector<bool>& target, const FixedDefender& mu,
                                        const std::optional<ColumnPolicy>& adversary, double tol = 1e-12,
                                        std::size_t max_iterations = 10'000'000);

struct BestResponse {
  ColumnPolicy columns;
  std::vector<double> values;  // satisfaction probability under (mu, columns)
};
// Pure stationary adversary minimizing the satisfaction probability against
// mu: argmin column under mu's own values, lowest index on ties.
BestResponse best_response(const Game& z, const std::vector<bool>& target, const FixedDefender& mu);

// Per-state optimal rows under q. Targets inside an accepting end component
// spread uniformly over the component's retained rows so play stays inside and
// keeps visiting it; every other state uses the lexicographic LP row.
std::vector<std::vector<double>> optimal_rows(const Game& z, const std::vector<bool>& target,
                                              const GamecSet& gamecs, const std::vector<double>& q,
                                              unsigned threads = 1);

struct Extraction {
  FiniteStateController fsc;
  std::vector<std::vector<double>> rows;  // per global state, as solved
  std::size_t conflicts = 0;              // controller keys shared by states with different rows
};

// Writes the per-state rows into the controller tables. mu0 keys use the
// observation of every non-detecting column; when several global states share
// a key, the state whose true valuation equals the observation wins, then the
// smallest true valuation. mu1 keys prefer the smallest true valuation.
Extraction extract_policy(const GlobalGame& gg, const ProductGame& p, const TimedBuchiAutomaton& a,
                          const std::vector<std::vector<double>>& rows);

// The controller's behaviour on the global game, one distribution per
// (state, column). Throws Error(Runtime, "IncompletePolicy") for a missing row
// the game can query.
FixedDefender controller_rows(const GlobalGame& gg, const ProductGame& p, const FiniteStateController& fsc);

// Controller that plays rows[s] at every memory value of DSG state s.
FiniteStateController stationary_controller(const GlobalGame& gg, const ProductGame& p, const TimedBuchiAutomaton& a,
                                            const std::vector<std::vector<double>>& dsg_rows);

// Copy of the game keeping only columns where the adversary plays
// `passive_action` and shows the true valuation.
GlobalGame restrict_to_passive(const GlobalGame& gg, const ProductGame& p, std::size_t passive_action = 0);

}  // namespace mitlgame
