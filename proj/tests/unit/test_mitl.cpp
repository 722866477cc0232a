#include <doctest.h>

#include <random>

#include "check_error.hpp"
#include "mitlgame/mitl.hpp"
#include "random_games.hpp"

using namespace mitlgame;

namespace {

Vocabulary ab() {
  Vocabulary v;
  v.atoms = {"a", "b", "x2_le_10"};
  v.variables = {"x2", "x3"};
  return v;
}

TimedWord word(std::vector<std::pair<std::uint64_t, Rational>> pos, Rational horizon) {
  TimedWord w;
  w.propositions = {"a", "b"};
  for (auto& [l, t] : pos) {
    w.letters.push_back(l);
    w.times.push_back(t);
  }
  w.horizon = horizon;
  return w;
}

// Direct reading of the until clause over word positions: some position k
// in the window satisfies b and every position m in [t, t_k) satisfies a.
bool until_by_pairs(const TimedWord& w, const Rational& t, const Interval& i) {
  for (std::size_t k = 0; k < w.times.size(); ++k) {
    const Rational d = w.times[k] - t;
    if (d < i.lo || (i.hi && d > *i.hi) || !w.holds(k, "b")) continue;
    bool prefix = true;
    for (std::size_t m = 0; m < k; ++m)
      if (w.times[m] >= t && !w.holds(m, "a")) prefix = false;
    if (prefix) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("parse: eventually over a labeled atom") {
  auto f = parse_mitl("F[0,5] (x2_le_10)", ab());
  REQUIRE(f->op == Op::Eventually);
  CHECK(f->interval.lo == Rational(0));
  CHECK(*f->interval.hi == Rational(5));
  CHECK(f->kids[0]->op == Op::Atom);
  CHECK(f->kids[0]->atom == "x2_le_10");
}

TEST_CASE("parse: until production") {
  auto f = parse_mitl("a U[1,2] b", ab());
  REQUIRE(f->op == Op::Until);
  CHECK(f->interval.lo == Rational(1));
  CHECK(*f->interval.hi == Rational(2));
  CHECK(f->kids[0]->atom == "a");
  CHECK(f->kids[1]->atom == "b");
}

TEST_CASE("parse errors carry their codes") {
  CHECK(error_code([] { parse_mitl("F[2,1] a", ab()); }) == "EmptyInterval");
  CHECK(error_code([] { parse_mitl("F[1,1] a", ab()); }) == "EmptyInterval");
  CHECK(error_code([] { parse_mitl("c & a", ab()); }) == "UndeclaredAtom");
  CHECK(error_code([] { parse_mitl("a &", ab()); }) == "SyntaxError");
  try {
    parse_mitl("a &\n  & b", ab());
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("2:3") != std::string::npos);
  }
}

TEST_CASE("comparison atoms get canonical names") {
  auto f = parse_mitl("F[0,5] (x2 <= 10 & x3<=10)", ab());
  CHECK(atoms_of(*f) == std::vector<std::string>{"x2<=10", "x3<=10"});
  auto c = parse_comparison_atom("x2<=10");
  REQUIRE(c);
  CHECK(c->variable == "x2");
  CHECK(c->relation == "<=");
  CHECK(c->threshold == 10.0);
  CHECK(!parse_comparison_atom("a"));
  CHECK(error_code([] { parse_mitl("x9 <= 3", ab()); }) == "UndeclaredAtom");
}

TEST_CASE("print then parse is the identity") {
  for (const char* text : {"F[0,5] (x2_le_10)", "a U[1,2] b", "!(a & b) | G[0,3] (a -> b)", "true & false",
                           "F[0.5,inf] a", "a U[1/3,2] (b & !a)"}) {
    auto f = parse_mitl(text, ab());
    auto g = parse_mitl(to_string(*f), ab());
    CHECK_MESSAGE(structurally_equal(*f, *g), text);
  }
}

TEST_CASE("normalize rewrites derived operators") {
  auto a = Formula::make_atom("a");
  const Interval i{Rational(0), Rational(5)};
  auto ev = normalize(Formula::eventually(i, a));
  CHECK(structurally_equal(*ev, *Formula::until(i, Formula::truth(), a)));
  auto al = normalize(Formula::always(i, a));
  CHECK(structurally_equal(*al, *Formula::negate(Formula::until(i, Formula::truth(), Formula::negate(a)))));
  CHECK(structurally_equal(*normalize(a), *a));
}

TEST_CASE("evaluate: eventually examples") {
  auto f = parse_mitl("F[0,5] a", ab());
  CHECK(evaluate(*f, word({{0, 1}, {1, 3}, {0, 6}}, 6), 0) == Verdict::Satisfied);
  CHECK(evaluate(*f, word({{0, 1}, {0, 3}, {0, 6}}, 6), 0) == Verdict::Violated);
  CHECK(evaluate(*f, word({{0, 1}, {0, 3}}, 4), 0) == Verdict::Inconclusive);
}

TEST_CASE("evaluate: until agrees with the pairwise reading on 200 random words") {
  std::mt19937_64 rng(17);
  auto f = parse_mitl("a U[1,2] b", ab());
  std::size_t satisfied = 0, checks = 0;
  for (int n = 0; n < 200; ++n) {
    TimedWord w;
    w.propositions = {"a", "b"};
    Rational t(0);
    for (int k = 0; k < 6; ++k) {
      t += Rational(static_cast<std::int64_t>(rng() % 2 + 1), 2);
      w.times.push_back(t);
      w.letters.push_back(rng() % 4);
    }
    w.horizon = t + Rational(3);
    // Evaluation times: 0 and every position.
    std::vector<Rational> starts{Rational(0)};
    starts.insert(starts.end(), w.times.begin(), w.times.end());
    for (const auto& s : starts) {
      const Verdict v = evaluate(*f, w, s);
      REQUIRE(v != Verdict::Inconclusive);
      const bool expect = until_by_pairs(w, s, f->interval);
      CHECK((v == Verdict::Satisfied) == expect);
      satisfied += expect;
      ++checks;
    }
  }
  CHECK(satisfied > 0);
  CHECK(satisfied < checks);
}

TEST_CASE("properties on random fragment formulas and words") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> props{"a", "b"};
  for (int n = 0; n < 300; ++n) {
    auto f = testsupport::random_fragment_formula(rng, props);
    auto w = testsupport::random_word(rng, props, 4);
    const Verdict v = evaluate(*f, w, 0);
    // Normalization preserves the verdict.
    CHECK(evaluate(*normalize(f), w, 0) == v);
    // De Morgan on a pair.
    auto g = testsupport::random_fragment_formula(rng, props);
    auto lhs = Formula::negate(Formula::conj(f, g));
    auto rhs = Formula::disj(Formula::negate(f), Formula::negate(g));
    CHECK(evaluate(*lhs, w, 0) == evaluate(*rhs, w, 0));
    // Definite verdicts survive extension of the word.
    if (v != Verdict::Inconclusive) {
      TimedWord longer = w;
      Rational t = w.horizon;
      for (int k = 0; k < 4; ++k) {
        t += Rational(1, 2);
        longer.times.push_back(t);
        longer.letters.push_back(rng() % 4);
      }
      longer.horizon = t;
      CHECK(evaluate(*f, longer, 0) == v);
    }
  }
}

TEST_CASE("horizon bound sums along nesting") {
  auto f = parse_mitl("F[0,5] (a & G[1,2] b)", ab());
  CHECK(*horizon_bound(*f) == Rational(7));
  CHECK(!horizon_bound(*parse_mitl("F[0,inf] a", ab())));
}

TEST_CASE("timed word invariants") {
  auto w = word({{0, 2}, {0, 1}}, 3);
  CHECK(error_code([&] { w.check(); }) == "MalformedWord");
  auto w2 = word({{0, 1}, {0, 2}}, Rational(3, 2));
  CHECK(error_code([&] { w2.check(); }) == "MalformedWord");
}
