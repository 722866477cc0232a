#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mitlgame/rational.hpp"

namespace mitlgame {

// Closed interval [lo, hi]; hi == nullopt means unbounded. lo < hi always.
struct Interval {
  Rational lo;
  std::optional<Rational> hi;

  bool contains(const Rational& d) const { return d >= lo && (!hi || d <= *hi); }
  bool bounded() const { return hi.has_value(); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Op { True, Atom, Not, And, Or, Implies, Until, Eventually, Always };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::True;
  std::string atom;               // Atom only
  Interval interval;              // Until / Eventually / Always only
  std::vector<FormulaPtr> kids;   // Until: {lhs, rhs}; Not/Eventually/Always: {arg}

  static FormulaPtr truth();
  static FormulaPtr make_atom(std::string name);
  static FormulaPtr negate(FormulaPtr f);
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr disj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr implies(FormulaPtr a, FormulaPtr b);
  static FormulaPtr until(Interval i, FormulaPtr a, FormulaPtr b);
  static FormulaPtr eventually(Interval i, FormulaPtr a);
  static FormulaPtr always(Interval i, FormulaPtr a);
};

bool structurally_equal(const Formula& a, const Formula& b);

// What the parser accepts as atoms. Plain names must be in `atoms`; comparison
// atoms "x <= 10" are accepted when `x` is in `variables` and become an atom
// whose name is the comparison with whitespace removed ("x<=10").
struct Vocabulary {
  std::set<std::string> atoms;
  std::set<std::string> variables;
};

// Throws Error(Validation, "SyntaxError") carrying line:column, or
// "UndeclaredAtom", or "EmptyInterval" for [a,b] with a >= b.
FormulaPtr parse_mitl(std::string_view text, const Vocabulary& vocab);

std::string to_string(const Formula& f);

// Rewrites Or, Implies, Eventually and Always into {True, Atom, Not, And, Until}.
FormulaPtr normalize(const FormulaPtr& f);

// Comparison atom decoded from its canonical name.
struct Comparison {
  std::string variable;
  std::string relation;  // "<=", ">=", "<", ">"
  double threshold = 0.0;
};
std::optional<Comparison> parse_comparison_atom(std::string_view name);

// Atom names appearing in f, sorted.
std::vector<std::string> atoms_of(const Formula& f);

// Sum over root-to-leaf paths of interval upper bounds, maximised over paths.
// nullopt when some interval on a path is unbounded.
std::optional<Rational> horizon_bound(const Formula& f);

// Finite prefix of a timed word. Letters are bitmasks over `propositions`
// (at most 64 of them). Every position with time <= horizon is present.
struct TimedWord {
  std::vector<std::string> propositions;
  std::vector<std::uint64_t> letters;
  std::vector<Rational> times;
  Rational horizon;

  // Throws Error(Validation) on non-increasing times or horizon < last time.
  void check() const;
  bool holds(std::size_t position, std::string_view atom) const;
};

enum class Verdict { Satisfied, Violated, Inconclusive };
const char* to_string(Verdict v);

// Three-valued point-based semantics on the finite prefix w. Definite verdicts
// hold for every progressive extension of w. At a time that carries no
// position, atoms are false when the time is within the horizon and unknown
// beyond it.
Verdict evaluate(const Formula& f, const TimedWord& w, const Rational& t);

}  // namespace mitlgame
