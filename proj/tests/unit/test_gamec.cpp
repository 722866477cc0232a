#include <doctest.h>

#include <random>

#include "mitlgame/gamec.hpp"
#include "oracles.hpp"
#include "random_games.hpp"

using namespace mitlgame;
using testsupport::brute_force_gamecs;

namespace {

Block to(std::uint32_t s) { return {Succ{s, 1.0}}; }

// Directed graph of one row and one column per state.
Game cycle_game(const std::vector<std::vector<std::uint32_t>>& succ, const std::vector<bool>& acc) {
  Game z;
  for (std::size_t s = 0; s < succ.size(); ++s) {
    Block b;
    for (auto t : succ[s]) b.push_back(Succ{t, 1.0 / static_cast<double>(succ[s].size())});
    z.add_state(1, 1, {b}, acc[s]);
  }
  return z;
}

void check_component_invariants(const Game& z, const GamecSet& set) {
  std::vector<bool> seen(z.size(), false);
  for (const auto& c : set.components) {
    std::vector<bool> member(z.size(), false);
    for (auto s : c.states) member[s] = true;
    bool accepting = false;
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      const auto s = c.states[i];
      CHECK_FALSE(seen[s]);
      seen[s] = true;
      accepting = accepting || z.accepting[s];
      REQUIRE_FALSE(c.rows[i].empty());
      for (auto r : c.rows[i])
        for (std::size_t col = 0; col < z.cols[s]; ++col)
          for (const auto& e : z.block(s, r, col))
            if (e.p > 0) CHECK(member[e.to]);
    }
    CHECK(accepting);
  }
}

}  // namespace

TEST_CASE("a robust accepting self-loop is one component") {
  Game z;
  z.add_state(1, 2, {to(0), to(0)}, true);
  auto g = compute_gamecs(z);
  REQUIRE(g.components.size() == 1);
  CHECK(g.components[0] == SubGame{{0}, {{0}}});
}

TEST_CASE("an accepting cycle the adversary can leave dissolves") {
  Game z;
  z.add_state(1, 1, {to(1)}, true);
  z.add_state(1, 2, {to(2), to(3)}, false);  // second column escapes
  z.add_state(1, 1, {to(0)}, false);
  z.add_state(1, 1, {to(3)}, false);          // non-accepting trap
  CHECK(compute_gamecs(z).components.empty());
  CHECK(brute_force_gamecs(z).components.empty());
  // Without acceptance the trap is still an end component.
  auto all = compute_gmecs(z);
  REQUIRE(all.components.size() == 1);
  CHECK(all.components[0].states == std::vector<std::size_t>{3});
}

TEST_CASE("a defender row that leaks is pruned while a safe row survives") {
  Game z;
  z.add_state(2, 2, {to(1), to(1), to(1), to(2)}, true);  // row 1 leaks under column 1
  z.add_state(1, 1, {to(0)}, false);
  z.add_state(1, 1, {to(2)}, false);
  auto g = compute_gamecs(z);
  REQUIRE(g.components.size() == 1);
  CHECK(g.components[0] == SubGame{{0, 1}, {{0}, {0}}});
  CHECK(g.components == brute_force_gamecs(z).components);
}

TEST_CASE("two disjoint robust accepting cycles") {
  auto z = cycle_game({{1}, {0}, {3}, {2}, {4}}, {true, false, false, true, false});
  auto g = compute_gamecs(z);
  REQUIRE(g.components.size() == 2);
  CHECK(g.components[0].states == std::vector<std::size_t>{0, 1});
  CHECK(g.components[1].states == std::vector<std::size_t>{2, 3});
  CHECK(g.components == brute_force_gamecs(z).components);
}

TEST_CASE("components agree with exhaustive enumeration on random games") {
  std::mt19937_64 rng(13);
  testsupport::GameShape shape;
  shape.max_states = 7;
  shape.max_rows = 2;
  shape.max_cols = 2;
  shape.max_successors = 2;
  std::size_t nonempty = 0;
  for (int n = 0; n < 150; ++n) {
    auto z = testsupport::random_game(rng, shape);
    auto got = compute_gamecs(z);
    check_component_invariants(z, got);
    CHECK(got.components == brute_force_gamecs(z).components);
    nonempty += !got.components.empty();
  }
  CHECK(nonempty > 10);
}

TEST_CASE("strongly connected components") {
  auto two = strongly_connected_components({{1}, {0}});
  REQUIRE(two.size() == 1);
  CHECK(two[0].size() == 2);
  CHECK(strongly_connected_components({{1}, {2}, {}}).size() == 3);
  CHECK(strongly_connected_components({}).empty());

  std::mt19937_64 rng(7);
  for (int n = 0; n < 5; ++n) {
    const std::size_t k = 50;
    std::vector<std::vector<std::size_t>> adj(k);
    Game z;
    for (std::size_t s = 0; s < k; ++s) {
      Block b;
      for (std::size_t t = 0; t < k; ++t)
        if (rng() % 40 == 0) {
          adj[s].push_back(t);
          b.push_back(Succ{static_cast<std::uint32_t>(t), 0.0});
        }
      for (auto& e : b) e.p = 1.0 / static_cast<double>(b.size());
      if (b.empty()) b.push_back(Succ{static_cast<std::uint32_t>(s), 1.0});
      z.add_state(1, 1, {b}, false);
    }
    const auto reach = testsupport::transitive_closure(z);
    auto sccs = strongly_connected_components(adj);
    std::vector<std::size_t> comp(k, k);
    std::size_t covered = 0;
    for (std::size_t c = 0; c < sccs.size(); ++c)
      for (auto s : sccs[c]) {
        CHECK(comp[s] == k);
        comp[s] = c;
        ++covered;
      }
    CHECK(covered == k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) CHECK((comp[i] == comp[j]) == (reach[i][j] && reach[j][i]));
  }
}

TEST_CASE("robust rows") {
  Game z;
  z.add_state(3, 2, {to(0), to(0), to(0), to(1), to(1), to(1)}, false);
  z.add_state(1, 1, {to(1)}, false);
  CHECK(robust_rows(z, 0, {true, false}) == std::vector<std::size_t>{0});
  CHECK(robust_rows(z, 0, {true, true}) == std::vector<std::size_t>{0, 1, 2});
}
