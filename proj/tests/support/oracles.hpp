#pragma once

#include <optional>
#include <vector>

#include "mitlgame/gamec.hpp"
#include "mitlgame/game.hpp"
#include "mitlgame/solver.hpp"

namespace testsupport {

// Enumerates every state subset (n <= 16). A subset N is an end component
// when each state keeps at least one row whose successors stay in N under
// every column and N is strongly connected through those rows. Returns the
// inclusion-maximal ones that contain an accepting state, each with all of
// its staying rows.
mitlgame::GamecSet brute_force_gamecs(const mitlgame::Game& z);

// Transitive closure by Floyd-Warshall over the graph that joins s to every
// successor of every (row, column) block; reach[i][j] includes i == j.
std::vector<std::vector<bool>> transitive_closure(const mitlgame::Game& z);

// Probability of eventually hitting `target` in the Markov chain obtained by
// fixing the defender's rows and a pure column per state, by Gaussian
// elimination on the states that can reach the target.
std::vector<double> reachability_by_linear_solve(const mitlgame::Game& z, const std::vector<bool>& target,
                                                 const std::vector<std::vector<double>>& rows,
                                                 const std::vector<std::size_t>& columns);

struct PureBounds {
  std::vector<double> max_min;  // best pure stationary defender against its pure best response
  std::vector<double> min_max;  // best pure stationary adversary against its pure best response
};

// Exhaustive enumeration of pure stationary policy pairs (product of choice
// counts at most `limit`; nullopt above it). On turn-based games both bounds
// equal the value; on concurrent games the value lies between them.
std::optional<PureBounds> pure_stationary_bounds(const mitlgame::Game& z, const std::vector<bool>& target,
                                                 std::size_t limit = 1u << 20);

}  // namespace testsupport
