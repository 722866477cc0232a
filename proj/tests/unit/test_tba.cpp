#include <doctest.h>

#include <random>

#include "check_error.hpp"
#include "mitlgame/tba.hpp"
#include "random_games.hpp"

using namespace mitlgame;

namespace {

Vocabulary vocab(std::initializer_list<const char*> atoms) {
  Vocabulary v;
  for (auto a : atoms) v.atoms.insert(a);
  return v;
}

std::size_t state_index(const TimedBuchiAutomaton& a, const std::string& name) {
  for (std::size_t i = 0; i < a.states.size(); ++i)
    if (a.states[i] == name) return i;
  FAIL("missing state " << name);
  return 0;
}

// Two states, one clock, a single edge that resets c1.
TimedBuchiAutomaton reset_automaton() {
  TimedBuchiAutomaton a;
  a.states = {"q", "r"};
  a.propositions = {"a"};
  a.clocks = {"c1"};
  a.accepting = {false, true};
  a.edges.push_back({0, 1, Formula::truth(), {0}, ClockConstraint::truth()});
  a.edges.push_back({1, 0, Formula::truth(), {}, ClockConstraint::truth()});
  return a;
}

}  // namespace

TEST_CASE("clock constraint evaluation") {
  const std::vector<std::string> clocks{"c1"};
  const ClockValuation v{Rational(3)};
  CHECK(eval_constraint(parse_clock_constraint("c1 <= 5", clocks), v));
  CHECK_FALSE(eval_constraint(parse_clock_constraint("c1 <= 5 & c1 > 3", clocks), v));
  CHECK(eval_constraint(parse_clock_constraint("true", clocks), v));
  CHECK(eval_constraint(ClockConstraint::truth(), ClockValuation{}));
  CHECK_FALSE(eval_constraint(ClockConstraint::falsity(), v));
  const ClockConstraint other{{ClockAtom{1, Rel::Le, Rational(2)}}, false};
  CHECK(error_code([&] { eval_constraint(other, v); }) == "UnknownClock");
}

TEST_CASE("step on the eventually automaton") {
  auto a = tba_from_fragment(parse_mitl("F[0,5] a", vocab({"a"})));
  const std::size_t q0 = a.initial, acc = state_index(a, "acc");
  auto next = step({q0, {Rational(3)}}, 1, Rational(1), a);
  REQUIRE(next.size() == 1);
  CHECK(next[0] == Configuration{acc, {Rational(4)}});

  // Past the deadline no edge leads to the accepting sink or keeps waiting;
  // the complete automaton routes the run into its rejecting sink instead.
  auto late = step({q0, {Rational(5)}}, 1, Rational(1), a);
  for (const auto& c : late) {
    CHECK_FALSE(a.accepting[c.q]);
    CHECK(c.q == state_index(a, "rej"));
  }
}

TEST_CASE("reset edges zero their clocks, others advance exactly") {
  auto a = reset_automaton();
  auto next = step({0, {Rational(7)}}, 0, Rational(1, 3), a);
  REQUIRE(next.size() == 1);
  CHECK(next[0] == Configuration{1, {Rational(0)}});
  auto back = step({1, {Rational(2, 7)}}, 0, Rational(1, 3), a);
  REQUIRE(back.size() == 1);
  CHECK(back[0].v[0] == Rational(2, 7) + Rational(1, 3));
}

TEST_CASE("lasso acceptance") {
  auto a = reset_automaton();
  const Configuration q7{0, {Rational(7)}}, r0{1, {Rational(0)}}, q1{0, {Rational(1)}};
  // Cycle through the accepting state r.
  std::vector<RunStep> stem{{q7, 0, Rational(1), r0}};
  std::vector<RunStep> cycle{{r0, 0, Rational(1), q1}, {q1, 0, Rational(1), r0}};
  stem[0].from = Configuration{0, {Rational(0)}};
  CHECK(is_accepting(stem, cycle, a));

  // Cycle that stays in a non-accepting sink.
  auto f = tba_from_fragment(parse_mitl("F[0,1] a", vocab({"a"})));
  const std::size_t rej = state_index(f, "rej");
  std::vector<RunStep> miss{{{f.initial, {Rational(0)}}, 0, Rational(2), {rej, {Rational(2)}}}};
  std::vector<RunStep> stay{{{rej, {Rational(2)}}, 0, Rational(1), {rej, {Rational(3)}}}};
  CHECK_FALSE(is_accepting(miss, stay, f));

  // A step the guard forbids is reported with its index.
  std::vector<RunStep> bad{{{f.initial, {Rational(0)}}, 0, Rational(2), {rej, {Rational(2)}}},
                           {{rej, {Rational(2)}}, 1, Rational(1), {state_index(f, "acc"), {Rational(3)}}}};
  try {
    is_accepting(bad, stay, f);
    FAIL("expected an infeasible run");
  } catch (const Error& e) {
    CHECK(e.code() == "InfeasibleRun");
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("fragment automaton shapes") {
  auto a = tba_from_fragment(parse_mitl("F[0,5] a", vocab({"a"})));
  CHECK(a.states.size() == 3);
  CHECK(a.clocks.size() == 1);
  CHECK(a.accepting == std::vector<bool>{false, true, false});
  CHECK(a.is_deterministic());
  CHECK_FALSE(a.has_resets());
  CHECK(a.max_constant() == Rational(5));

  Vocabulary v;
  v.variables = {"x2", "x3", "x4"};
  auto phi3 = tba_from_fragment(parse_mitl("F[0,5] (x2 <= 10 & x3 <= 10 & x4 <= 10)", v));
  CHECK(phi3.states.size() == 3);
  CHECK(phi3.clocks.size() == 1);
  CHECK(phi3.propositions == std::vector<std::string>{"x2<=10", "x3<=10", "x4<=10"});
  // Only the full compound letter can be accepted before the deadline.
  for (std::uint64_t l = 0; l < 8; ++l) {
    auto next = step({phi3.initial, {Rational(0)}}, l, Rational(1), phi3);
    REQUIRE(next.size() == 1);
    CHECK(phi3.accepting[next[0].q] == (l == 7));
  }

  auto two = tba_from_fragment(parse_mitl("F[0,2] a & G[0,3] b", vocab({"a", "b"})));
  CHECK(two.clocks.size() == 2);
  CHECK(two.is_deterministic());
}

TEST_CASE("nested temporal operators are rejected") {
  auto f = parse_mitl("F[0,2] G[0,3] a", vocab({"a"}));
  CHECK(error_kind([&] { tba_from_fragment(f); }) == ErrorKind::Unsupported);
  CHECK(error_code([&] { tba_from_fragment(f); }) == "UnsupportedFragment");
}

TEST_CASE("automaton verdicts match the evaluator on random words") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> props{"a", "b"};
  std::size_t definite = 0;
  for (int n = 0; n < 300; ++n) {
    auto f = testsupport::random_fragment_formula(rng, props);
    auto a = tba_from_fragment(f);
    auto w = testsupport::random_word(rng, props, 8);
    const Verdict e = evaluate(*f, w, 0);
    if (e == Verdict::Inconclusive) continue;
    ++definite;
    TimedWord projected = w;
    projected.propositions = a.propositions;
    for (auto& l : projected.letters) l = project_letter(l, w.propositions, a.propositions);
    CHECK_MESSAGE(prefix_verdict(a, projected) == e, to_string(*f));
  }
  CHECK(definite > 100);
}

TEST_CASE("steps never produce negative clocks") {
  std::mt19937_64 rng(2);
  const std::vector<std::string> props{"a", "b"};
  for (int n = 0; n < 100; ++n) {
    auto a = tba_from_fragment(testsupport::random_fragment_formula(rng, props));
    Configuration c{a.initial, ClockValuation(a.clocks.size(), Rational(0))};
    for (int k = 0; k < 8; ++k) {
      auto next = step(c, rng() % 4, Rational(static_cast<std::int64_t>(rng() % 3 + 1), 2), a);
      REQUIRE(next.size() == 1);
      for (const auto& x : next[0].v) CHECK(x >= Rational(0));
      c = next[0];
    }
  }
}

TEST_CASE("letter projection") {
  CHECK(project_letter(0b101, {"a", "b", "c"}, {"c", "a"}) == 0b11);
  CHECK(project_letter(0b010, {"a", "b", "c"}, {"c", "a"}) == 0);
}
