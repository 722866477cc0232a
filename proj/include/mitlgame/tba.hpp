#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mitlgame/mitl.hpp"
#include "mitlgame/rational.hpp"

namespace mitlgame {

enum class Rel { Le, Ge, Lt, Gt };
const char* to_string(Rel r);

struct ClockAtom {
  std::size_t clock = 0;
  Rel rel = Rel::Le;
  Rational constant;
  friend bool operator==(const ClockAtom&, const ClockAtom&) = default;
};

// Conjunction of atoms. An empty conjunction is true; `never` makes it false.
struct ClockConstraint {
  std::vector<ClockAtom> atoms;
  bool never = false;

  static ClockConstraint truth() { return {}; }
  static ClockConstraint falsity() { return {{}, true}; }
  ClockConstraint operator&&(const ClockConstraint& o) const;
  friend bool operator==(const ClockConstraint&, const ClockConstraint&) = default;
};

using ClockValuation = std::vector<Rational>;

// Throws Error(Validation, "UnknownClock") when an atom names a clock outside v.
bool eval_constraint(const ClockConstraint& c, const ClockValuation& v);
bool eval_constraint(const ClockConstraint& c, const std::vector<std::int64_t>& v);

// Parses "c1 <= 5 & c1 > 3", "true" or "false" against the declared clock names.
ClockConstraint parse_clock_constraint(std::string_view text, const std::vector<std::string>& clocks);
std::string to_string(const ClockConstraint& c, const std::vector<std::string>& clocks);

struct TbaEdge {
  std::size_t from = 0, to = 0;
  FormulaPtr letter;                 // Boolean formula over the automaton's propositions
  std::vector<std::size_t> resets;   // clock indices set to zero
  ClockConstraint guard;
};

struct Configuration {
  std::size_t q = 0;
  ClockValuation v;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

class TimedBuchiAutomaton {
 public:
  std::vector<std::string> states;
  std::vector<std::string> propositions;  // letter bit i is propositions[i]
  std::vector<std::string> clocks;
  std::vector<TbaEdge> edges;
  std::vector<bool> accepting;
  std::size_t initial = 0;

  // Checks references and determinism; throws Error(Validation).
  void check() const;
  bool is_deterministic() const;

  bool letter_matches(const TbaEdge& e, std::uint64_t letter) const;
  std::vector<std::size_t> edges_from(std::size_t q) const;

  // Largest constant over all guards; zero for a guard-free automaton.
  Rational max_constant() const;
  // Saturation cap for integer valuations: floor(max constant) + 1.
  std::int64_t valuation_cap() const { return max_constant().floor() + 1; }
  bool has_resets() const;
};

// Every configuration reachable by one edge: v + delta must satisfy the guard,
// reset clocks become 0, the others advance by delta.
std::vector<Configuration> step(const Configuration& cfg, std::uint64_t letter, const Rational& delta,
                                const TimedBuchiAutomaton& a);

// Same on the saturating integer grid used by the product.
struct QuantizedStep {
  std::size_t q;
  std::vector<std::int64_t> v;
  std::size_t edge;
};
std::vector<QuantizedStep> step_quantized(std::size_t q, const std::vector<std::int64_t>& v, std::uint64_t letter,
                                          std::int64_t delta, const TimedBuchiAutomaton& a);

struct RunStep {
  Configuration from;
  std::uint64_t letter = 0;
  Rational delta;
  Configuration to;
};

// Lasso acceptance: stem then a cycle repeated forever. Every step is replayed
// through step(); the first infeasible one raises Error(Validation,
// "InfeasibleRun") naming its index (stem first, then cycle).
bool is_accepting(const std::vector<RunStep>& stem, const std::vector<RunStep>& cycle, const TimedBuchiAutomaton& a);

// Automaton for the bounded fragment: after normalization, a conjunction of
// (possibly negated) Until operators whose operands are Boolean. One clock per
// operator; clocks are never reset. Anything else raises
// Error(Unsupported, "UnsupportedFragment").
TimedBuchiAutomaton tba_from_fragment(const FormulaPtr& f);

// Verdict of the automaton on every progressive extension of the prefix w:
// Satisfied when all are accepted, Violated when none are. Requires a
// deterministic automaton without resets.
Verdict prefix_verdict(const TimedBuchiAutomaton& a, const TimedWord& w);

// Remaps a letter over `from` propositions to the automaton's propositions.
std::uint64_t project_letter(std::uint64_t letter, const std::vector<std::string>& from,
                             const std::vector<std::string>& to);

}  // namespace mitlgame
