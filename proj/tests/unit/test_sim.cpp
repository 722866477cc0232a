#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>

#include "check_error.hpp"
#include "mitlgame/pipeline.hpp"
#include "mitlgame/sim.hpp"
#include "oracles.hpp"
#include "random_games.hpp"

using namespace mitlgame;

namespace {

// Matching pennies repeated every tick: a match enters the absorbing state
// labeled `a`, a mismatch stays. `b` never holds.
Dsg repeated_pennies() {
  Dsg g;
  g.states = {"s0", "s1"};
  g.propositions = {"a", "b"};
  g.labels = {0, 1};
  g.defender_actions = {"h", "t"};
  g.adversary_actions = {"h", "t"};
  g.defender_of = {{0, 1}, {0}};
  g.adversary_of = {{0, 1}, {0}};
  const Outcome hit{1, 1.0, {{1, 1.0}}}, miss{0, 1.0, {{1, 1.0}}};
  g.kernel = {{{hit}, {miss}, {miss}, {hit}}, {{Outcome{1, 1.0, {{1, 1.0}}}}}};
  return g;
}

Vocabulary ab() {
  Vocabulary v;
  v.atoms = {"a", "b"};
  return v;
}

struct Setup {
  Dsg g;
  TimedBuchiAutomaton a;
  Synthesis syn;
  FormulaPtr f;
};

Setup pennies_setup(GdsgOptions game = {}) {
  Setup s;
  s.g = repeated_pennies();
  s.f = parse_mitl("F[0,3] a", ab());
  s.a = tba_from_fragment(s.f);
  SynthesisOptions opt;
  opt.game = game;
  s.syn = synthesize(s.g, s.a, opt);
  return s;
}

FunctionPolicy uniform_policy(const Dsg& g) {
  return FunctionPolicy([&g](const DefenderView& v) {
    ActionDistribution row;
    for (std::size_t c = 0; c < g.nc(v.s); ++c) row.emplace_back(c, 1.0 / static_cast<double>(g.nc(v.s)));
    return row;
  });
}

}  // namespace

TEST_CASE("passive play shows true times and never detects") {
  auto s = pennies_setup();
  Simulator sim(s.g, s.a, s.syn.product, s.syn.global);
  auto def = uniform_policy(s.g);
  PassiveAdversary adv;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = sim.rollout(def, adv, 6, seed);
    for (const auto& st : r.steps) {
      CHECK(st.observed_time == st.true_time);
      CHECK_FALSE(st.manipulated);
      CHECK(st.hypothesis == Hypothesis::H0);
    }
    r.word.check();
  }
}

TEST_CASE("a shift beyond the threshold latches detection") {
  GdsgOptions game;
  game.kappa_max = 3;
  game.detect_threshold = 2.0;
  auto s = pennies_setup(game);
  Simulator sim(s.g, s.a, s.syn.product, s.syn.global);
  auto def = uniform_policy(s.g);
  // Show the valuation three ticks ahead whenever the column exists.
  FunctionAdversary adv([](const AdversaryView& v, const GlobalGame& gg) {
    const auto& cols = gg.columns[v.global];
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (!v.detected && !v.v.empty() && cols[c].observed[0] == v.v[0] + 3) return c;
    return std::size_t{0};
  });
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = sim.rollout(def, adv, 6, seed);
    REQUIRE_FALSE(r.steps.empty());
    CHECK(r.steps[0].manipulated);
    for (const auto& st : r.steps) CHECK(st.hypothesis == Hypothesis::H1);
  }
}

TEST_CASE("trivial specifications") {
  auto s = pennies_setup();
  Simulator sim(s.g, s.a, s.syn.product, s.syn.global);
  auto def = uniform_policy(s.g);
  PassiveAdversary adv;
  EstimateOptions opt;
  opt.rollouts = 500;
  opt.horizon = 6;
  auto top = estimate_satisfaction(sim, def, adv, parse_mitl("true", ab()), opt);
  CHECK(top.p_hat == 1.0);
  auto never = estimate_satisfaction(sim, def, adv, parse_mitl("F[0,3] b", ab()), opt);
  CHECK(never.p_hat == 0.0);
  CHECK(never.inconclusive == 0);
  opt.horizon = 2;
  CHECK(error_code([&] { estimate_satisfaction(sim, def, adv, parse_mitl("F[0,3] b", ab()), opt); }) ==
        "HorizonTooShort");
}

TEST_CASE("estimates agree with the solved value against the best response") {
  auto s = pennies_setup();
  // Three independent fair rounds: 1 - (1/2)^3.
  CHECK(s.syn.value == doctest::Approx(0.875).epsilon(1e-5));
  Simulator sim(s.g, s.a, s.syn.product, s.syn.global);
  ControllerPolicy def(s.syn.extraction.fsc);
  const auto mu = controller_rows(s.syn.global, s.syn.product, s.syn.extraction.fsc);
  TableAdversary adv(best_response(s.syn.global.game, s.syn.vi.target, mu).columns);
  EstimateOptions opt;
  opt.rollouts = 10000;
  opt.horizon = simulation_horizon(*s.f);
  opt.seed = 5;
  auto e = estimate_satisfaction(sim, def, adv, s.f, opt);
  CHECK(e.inconclusive == 0);
  CHECK(std::abs(e.p_hat - s.syn.value) <= 3 * e.half_width);
  CHECK(e.half_width == doctest::Approx(1.96 * std::sqrt(e.p_hat * (1 - e.p_hat) / 10000.0)));
}

TEST_CASE("rollouts are reproducible from their seed") {
  auto s = pennies_setup();
  Simulator sim(s.g, s.a, s.syn.product, s.syn.global);
  auto def = uniform_policy(s.g);
  PassiveAdversary adv;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto x = sim.rollout(def, adv, 8, seed), y = sim.rollout(def, adv, 8, seed);
    REQUIRE(x.steps.size() == y.steps.size());
    for (std::size_t i = 0; i < x.steps.size(); ++i) {
      CHECK(x.steps[i].dsg_state == y.steps[i].dsg_state);
      CHECK(x.steps[i].uc == y.steps[i].uc);
      CHECK(x.steps[i].true_time == y.steps[i].true_time);
    }
    CHECK(x.word.letters == y.word.letters);
    CHECK(x.word.times == y.word.times);
  }
  EstimateOptions one, four;
  one.rollouts = four.rollouts = 2000;
  one.horizon = four.horizon = 4;
  four.threads = 4;
  auto e1 = estimate_satisfaction(sim, def, adv, s.f, one);
  auto e4 = estimate_satisfaction(sim, def, adv, s.f, four);
  CHECK(e1.satisfied == e4.satisfied);
}

TEST_CASE("Clopper-Pearson bounds invert the binomial tails") {
  for (auto [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 10}, {5, 10}, {10, 10}, {37, 200}}) {
    const auto [lo, hi] = clopper_pearson(k, n);
    CHECK(lo <= static_cast<double>(k) / n);
    CHECK(hi >= static_cast<double>(k) / n);
    if (k > 0) {
      // P(X >= k | p = lo) = 0.025
      boost::math::binomial_distribution<double> b(static_cast<double>(n), lo);
      CHECK(boost::math::cdf(boost::math::complement(b, static_cast<double>(k) - 1)) == doctest::Approx(0.025));
    } else {
      CHECK(lo == 0.0);
    }
    if (k < n) {
      boost::math::binomial_distribution<double> b(static_cast<double>(n), hi);
      CHECK(boost::math::cdf(b, static_cast<double>(k)) == doctest::Approx(0.025));
    } else {
      CHECK(hi == 1.0);
    }
  }
}

TEST_CASE("best response matches exhaustive search over stationary columns") {
  std::mt19937_64 rng(61);
  testsupport::GameShape shape;
  shape.max_states = 5;
  shape.max_cols = 3;
  for (int n = 0; n < 40; ++n) {
    auto z = testsupport::random_game(rng, shape);
    const auto target = reachability_targets(z, TargetMode::GamecUnion);
    std::vector<std::vector<double>> rows(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) rows[s] = testsupport::random_distribution(rng, z.rows[s]);
    const auto br = best_response(z, target, fixed_rows(z, rows));
    std::size_t total = 1;
    for (auto c : z.cols) total *= c;
    std::vector<double> best(z.size(), 1.0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      ColumnPolicy cols(z.size());
      std::size_t rest = idx;
      for (std::size_t s = 0; s < z.size(); ++s) {
        cols[s] = rest % z.cols[s];
        rest /= z.cols[s];
      }
      const auto v = testsupport::reachability_by_linear_solve(z, target, rows, cols);
      for (std::size_t s = 0; s < z.size(); ++s) best[s] = std::min(best[s], v[s]);
    }
    for (std::size_t s = 0; s < z.size(); ++s) CHECK(std::abs(br.values[s] - best[s]) <= 1e-6);
  }
}

TEST_CASE("memoryless play without manipulation follows the product chain in law") {
  std::mt19937_64 rng(67);
  for (int n = 0; n < 5; ++n) {
    auto g = testsupport::random_dsg(rng, 4, 2, 2);
    auto a = tba_from_fragment(parse_mitl("F[0,20] p", [] {
      Vocabulary v;
      v.atoms = {"p", "q"};
      return v;
    }()));
    GdsgOptions opt;
    opt.kappa_max = 0;
    opt.fsc_size = 1;
    opt.detect_threshold = std::nullopt;
    auto [p, gg] = build_games(g, a, opt);
    Simulator sim(g, a, p, gg);
    auto def = uniform_policy(g);
    PassiveAdversary adv;

    // Chain of the uniform defender against adversary action 0.
    const std::size_t k = g.size();
    std::vector<std::vector<double>> step(k, std::vector<double>(k, 0.0));
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t c = 0; c < g.nc(s); ++c)
        for (const auto& o : g.row(s, c, 0)) step[s][o.to] += o.p / static_cast<double>(g.nc(s));
    std::vector<double> expect = step[g.initial];

    const std::size_t rollouts = 4000;
    std::vector<double> counts(k, 0.0);
    // The source of the second transition is the state entered by the first.
    for (std::size_t r = 0; r < rollouts; ++r) {
      auto ro = sim.rollout(def, adv, 100, 1000 + r);
      REQUIRE(ro.steps.size() >= 2);
      counts[ro.steps[1].dsg_state] += 1;
    }
    double chi = 0;
    std::size_t cells = 0;
    for (std::size_t s = 0; s < k; ++s) {
      const double e = expect[s] * rollouts;
      if (e <= 0) {
        CHECK(counts[s] == 0);
        continue;
      }
      chi += (counts[s] - e) * (counts[s] - e) / e;
      ++cells;
    }
    if (cells < 2) continue;
    boost::math::chi_squared_distribution<double> law(static_cast<double>(cells - 1));
    CHECK(boost::math::cdf(boost::math::complement(law, chi)) > 0.01);
  }
}
