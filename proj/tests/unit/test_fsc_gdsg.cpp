#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "check_error.hpp"
#include "mitlgame/fsc.hpp"
#include "mitlgame/gdsg.hpp"
#include "random_games.hpp"

using namespace mitlgame;

namespace {

std::set<Valuation> observed_set(const std::vector<std::pair<std::size_t, Valuation>>& cols, std::size_t ua) {
  std::set<Valuation> out;
  for (const auto& [u, v] : cols)
    if (u == ua) out.insert(v);
  return out;
}

struct Built {
  Dsg g;
  TimedBuchiAutomaton a;
  ProductGame p;
};

Built random_product(std::mt19937_64& rng) {
  Built b;
  b.g = testsupport::random_dsg(rng, 2 + rng() % 4, 1 + rng() % 2, 1 + rng() % 2);
  b.a = tba_from_fragment(testsupport::random_fragment_formula(rng, {"p", "q"}));
  b.p = build_product(b.g, b.a);
  return b;
}

}  // namespace

TEST_CASE("detection threshold on the infinity norm") {
  CHECK(detect({3}, {4}, 2.0) == Hypothesis::H0);
  CHECK(detect({3}, {6}, 2.0) == Hypothesis::H1);
  CHECK(detect({3}, {5}, 2.0) == Hypothesis::H0);
  CHECK(detect({4, 1}, {4, 1}, 0.0) == Hypothesis::H0);
  CHECK(detect({0, 0}, {1, 3}, 2.0) == Hypothesis::H1);
  CHECK(detect({0}, {9}, std::nullopt) == Hypothesis::H0);
  CHECK(error_code([] { detect({1}, {1, 2}, 2.0); }) == "DimensionMismatch");
}

TEST_CASE("estimate advancement") {
  CHECK(advance_estimate({2}, 1, {}, 9) == Valuation{3});
  CHECK(advance_estimate({2}, 1, {0}, 9) == Valuation{0});
  CHECK(advance_estimate({9}, 1, {}, 9) == Valuation{9});
  CHECK(advance_estimate({1, 8}, 3, {}, 9) == Valuation{4, 9});
}

TEST_CASE("controller rows by hypothesis") {
  FiniteStateController f;
  f.clocks = {"c1"};
  f.mu0[{Valuation{0}, 0, 0, Valuation{0}}] = {{0, 0.5}, {1, 0.5}};
  f.mu0[{Valuation{0}, 0, 0, Valuation{1}}] = {{1, 1.0}};
  f.mu1[{Valuation{0}, 0, 0}] = {{0, 1.0}};
  const auto& uniform = f.act({0}, false, 0, 0, {0});
  CHECK(uniform == ActionDistribution{{0, 0.5}, {1, 0.5}});
  CHECK(f.act({0}, false, 0, 0, {1}) == ActionDistribution{{1, 1.0}});
  // Under H1 the observation is never read.
  for (std::int64_t v = 0; v < 5; ++v) CHECK(&f.act({0}, true, 0, 0, {v}) == &f.mu1.at({Valuation{0}, 0, 0}));
  CHECK(error_code([&] { f.act({1}, false, 0, 0, {0}); }) == "IncompletePolicy");
  CHECK(error_code([&] { f.act({1}, true, 0, 0, {0}); }) == "IncompletePolicy");

  f.check([](std::size_t) { return std::size_t{2}; });
  CHECK(error_kind([&] { f.check([](std::size_t) { return std::size_t{1}; }); }) == ErrorKind::Validation);
  CHECK(error_kind([] { check_distribution({{0, 0.5}}, 2, "row"); }) == ErrorKind::Validation);
  CHECK(error_kind([] { check_distribution({{0, 1.5}, {1, -0.5}}, 2, "row"); }) == ErrorKind::Validation);
}

TEST_CASE("adversary choices around a valuation") {
  // |U_A| x |{v-1, v, v+1} within the grid|.
  CHECK(enumerate_adversary_choices({1}, 3, 1, 2).size() == 2 * 3);
  CHECK(enumerate_adversary_choices({0}, 3, 1, 2).size() == 2 * 2);

  auto zero = enumerate_adversary_choices({0}, 5, 2, 1);
  CHECK(observed_set(zero, 0) == std::set<Valuation>{{0}, {1}, {2}});

  auto none = enumerate_adversary_choices({2}, 5, 0, 3);
  REQUIRE(none.size() == 3);
  for (std::size_t u = 0; u < 3; ++u) CHECK(observed_set(none, u) == std::set<Valuation>{{2}});

  auto top = enumerate_adversary_choices({3}, 3, 2, 1);
  CHECK(observed_set(top, 0) == std::set<Valuation>{{1}, {2}, {3}});
  CHECK(top.size() == 3);

  // One common shift for every clock.
  auto two = enumerate_adversary_choices({1, 3}, 4, 1, 1);
  CHECK(observed_set(two, 0) == std::set<Valuation>{{0, 2}, {1, 3}, {2, 4}});
  // Identity first for each action.
  CHECK(two.front().second == Valuation{1, 3});
}

TEST_CASE("global game structure on random products") {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 20; ++n) {
    auto b = random_product(rng);
    GdsgOptions opt;
    opt.kappa_max = 1;
    auto z = build_global(b.p, b.g, b.a, opt);
    CHECK(z.game.stochasticity_error() <= 1e-9);
    for (std::size_t i = 0; i < z.states.size(); ++i) {
      const auto& st = z.states[i];
      const auto& ps = b.p.states[st.p];
      CHECK(z.game.accepting[i] == b.p.accepting[st.p]);
      if (ps.violation()) continue;
      if (st.detected) {
        // H1 columns are the actuator actions alone; nothing reads a shift.
        CHECK(z.game.cols[i] == b.p.na[st.p]);
        for (const auto& c : z.columns[i]) {
          CHECK_FALSE(c.detect);
          CHECK(c.observed == ps.v);
        }
        continue;
      }
      std::set<Valuation> shifts;
      for (std::int64_t k = -1; k <= 1; ++k) {
        Valuation v = ps.v;
        for (auto& x : v) x = std::clamp<std::int64_t>(x + k, 0, z.valuation_cap);
        shifts.insert(v);
      }
      CHECK(z.game.cols[i] == b.p.na[st.p] * shifts.size());
      // A detecting column moves to the H1 twin with probability 1.
      for (std::size_t c = 0; c < z.columns[i].size(); ++c) {
        if (!z.columns[i][c].detect) continue;
        for (std::size_t r = 0; r < z.game.rows[i]; ++r) {
          const auto& blk = z.game.block(i, r, c);
          REQUIRE(blk.size() == 1);
          CHECK(blk[0].p == 1.0);
          CHECK(z.states[blk[0].to].p == st.p);
          CHECK(z.states[blk[0].to].detected);
        }
      }
    }
    // Detection latches: H1 states only reach H1 states.
    for (std::size_t i = 0; i < z.states.size(); ++i)
      if (z.states[i].detected)
        for (const auto& blk : z.game.blocks[i])
          for (const auto& e : blk)
            if (!b.p.states[z.states[e.to].p].violation()) CHECK(z.states[e.to].detected);
  }
}

TEST_CASE("without manipulation the global game projects onto the product") {
  std::mt19937_64 rng(41);
  for (int n = 0; n < 20; ++n) {
    auto b = random_product(rng);
    GdsgOptions opt;
    opt.kappa_max = 0;
    opt.detect_threshold = std::nullopt;
    opt.fsc_size = 1;
    auto z = build_global(b.p, b.g, b.a, opt);
    CHECK(z.lambda_cap == 0);
    for (std::size_t i = 0; i < z.states.size(); ++i) {
      const std::size_t p = z.states[i].p;
      CHECK_FALSE(z.states[i].detected);
      if (b.p.states[p].violation()) continue;
      REQUIRE(z.game.rows[i] == b.p.nc[p]);
      REQUIRE(z.game.cols[i] == b.p.na[p]);
      for (std::size_t r = 0; r < b.p.nc[p]; ++r)
        for (std::size_t c = 0; c < b.p.na[p]; ++c) {
          std::map<std::size_t, double> projected;
          for (const auto& e : z.game.block(i, r, c)) projected[z.states[e.to].p] += e.p;
          std::map<std::size_t, double> expected;
          for (const auto& [to, q] : b.p.row(p, r, c)) expected[to] += q;
          REQUIRE(projected.size() == expected.size());
          for (const auto& [to, q] : expected) CHECK(std::abs(projected[to] - q) <= 1e-12);
        }
    }
  }
}

TEST_CASE("expected durations round to the grid") {
  Dsg g;
  g.states = {"s0", "s1"};
  g.propositions = {};
  g.labels = {0, 0};
  g.defender_actions = {"c"};
  g.adversary_actions = {"u"};
  g.defender_of = {{0}, {0}};
  g.adversary_of = {{0}, {0}};
  g.kernel = {{{Outcome{1, 1.0, {{1, 0.5}, {2, 0.5}}}}}, {{Outcome{1, 1.0, {{1, 0.2}, {3, 0.8}}}}}};
  // Mean 1.5 sits on a half: ties go to the mode, which is 1 (lowest of equals).
  CHECK(expected_duration(g, 0, 0, 1) == 1);
  // Mean 2.6 rounds to 3.
  CHECK(expected_duration(g, 1, 0, 1) == 3);
}
