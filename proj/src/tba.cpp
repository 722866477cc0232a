#include "mitlgame/tba.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "mitlgame/error.hpp"

namespace mitlgame {

const char* to_string(Rel r) {
  switch (r) {
    case Rel::Le: return "<=";
    case Rel::Ge: return ">=";
    case Rel::Lt: return "<";
    case Rel::Gt: return ">";
  }
  return "?";
}

ClockConstraint ClockConstraint::operator&&(const ClockConstraint& o) const {
  ClockConstraint c = *this;
  c.never = never || o.never;
  c.atoms.insert(c.atoms.end(), o.atoms.begin(), o.atoms.end());
  return c;
}

namespace {

bool compare(const Rational& x, Rel r, const Rational& k) {
  switch (r) {
    case Rel::Le: return x <= k;
    case Rel::Ge: return x >= k;
    case Rel::Lt: return x < k;
    case Rel::Gt: return x > k;
  }
  return false;
}

template <class V>
bool eval_generic(const ClockConstraint& c, const V& v) {
  if (c.never) return false;
  for (const auto& a : c.atoms) {
    if (a.clock >= v.size())
      throw validation_error("UnknownClock", "clock index " + std::to_string(a.clock) + " outside valuation");
    if (!compare(Rational(v[a.clock]), a.rel, a.constant)) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool eval_letter(const Formula& f, std::uint64_t letter, const std::vector<std::string>& props) {
  switch (f.op) {
    case Op::True: return true;
    case Op::Atom:
      for (std::size_t b = 0; b < props.size(); ++b)
        if (props[b] == f.atom) return (letter >> b) & 1u;
      return false;
    case Op::Not: return !eval_letter(*f.kids[0], letter, props);
    case Op::And: return eval_letter(*f.kids[0], letter, props) && eval_letter(*f.kids[1], letter, props);
    case Op::Or: return eval_letter(*f.kids[0], letter, props) || eval_letter(*f.kids[1], letter, props);
    case Op::Implies: return !eval_letter(*f.kids[0], letter, props) || eval_letter(*f.kids[1], letter, props);
    default: throw validation_error("TemporalLetter", "edge letters must be Boolean formulas");
  }
}

bool is_boolean(const Formula& f) {
  if (f.op == Op::Until || f.op == Op::Eventually || f.op == Op::Always) return false;
  return std::all_of(f.kids.begin(), f.kids.end(), [](const FormulaPtr& k) { return is_boolean(*k); });
}

bool is_false(const FormulaPtr& f) { return f->op == Op::Not && f->kids[0]->op == Op::True; }

FormulaPtr mk_not(const FormulaPtr& f) {
  if (f->op == Op::Not) return f->kids[0];
  return Formula::negate(f);
}
FormulaPtr mk_and(const FormulaPtr& a, const FormulaPtr& b) {
  if (is_false(a) || is_false(b)) return Formula::negate(Formula::truth());
  if (a->op == Op::True) return b;
  if (b->op == Op::True) return a;
  return Formula::conj(a, b);
}

// Joint satisfiability of two constraints over non-negative reals.
bool jointly_satisfiable(const ClockConstraint& c, std::size_t nclocks) {
  if (c.never) return false;
  for (std::size_t k = 0; k < nclocks; ++k) {
    Rational lo(0), hi;
    bool lo_strict = false, has_hi = false, hi_strict = false;
    for (const auto& a : c.atoms) {
      if (a.clock != k) continue;
      bool strict = a.rel == Rel::Lt || a.rel == Rel::Gt;
      if (a.rel == Rel::Ge || a.rel == Rel::Gt) {
        if (a.constant > lo || (a.constant == lo && strict)) {
          lo = a.constant;
          lo_strict = strict;
        }
      } else if (!has_hi || a.constant < hi || (a.constant == hi && strict)) {
        hi = a.constant;
        hi_strict = strict;
        has_hi = true;
      }
    }
    if (has_hi && (hi < lo || (hi == lo && (lo_strict || hi_strict)))) return false;
  }
  return true;
}

bool letters_overlap(const Formula& a, const Formula& b) {
  std::vector<std::string> atoms = atoms_of(a);
  for (const auto& x : atoms_of(b))
    if (std::find(atoms.begin(), atoms.end(), x) == atoms.end()) atoms.push_back(x);
  if (atoms.size() > 20) throw validation_error("TbaTooLarge", "edge letters mention more than 20 propositions");
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << atoms.size()); ++m)
    if (eval_letter(a, m, atoms) && eval_letter(b, m, atoms)) return true;
  return false;
}

}  // namespace

bool eval_constraint(const ClockConstraint& c, const ClockValuation& v) { return eval_generic(c, v); }
bool eval_constraint(const ClockConstraint& c, const std::vector<std::int64_t>& v) { return eval_generic(c, v); }

ClockConstraint parse_clock_constraint(std::string_view text, const std::vector<std::string>& clocks) {
  std::string_view s = trim(text);
  if (s.empty() || s == "true") return ClockConstraint::truth();
  if (s == "false") return ClockConstraint::falsity();
  ClockConstraint c;
  while (!s.empty()) {
    auto amp = s.find('&');
    std::string_view part = trim(s.substr(0, amp));
    s = amp == std::string_view::npos ? std::string_view{} : s.substr(amp + 1);
    std::size_t at = part.find_first_of("<>");
    if (at == std::string_view::npos)
      throw validation_error("BadConstraint", "expected 'clock <op> constant' in '" + std::string(text) + "'");
    bool eq = at + 1 < part.size() && part[at + 1] == '=';
    ClockAtom atom;
    atom.rel = part[at] == '<' ? (eq ? Rel::Le : Rel::Lt) : (eq ? Rel::Ge : Rel::Gt);
    std::string name(trim(part.substr(0, at)));
    auto it = std::find(clocks.begin(), clocks.end(), name);
    if (it == clocks.end()) throw validation_error("UnknownClock", "undeclared clock '" + name + "'");
    atom.clock = static_cast<std::size_t>(it - clocks.begin());
    atom.constant = Rational::parse(trim(part.substr(at + (eq ? 2 : 1))));
    if (atom.constant < Rational(0)) throw validation_error("BadConstraint", "negative clock constant");
    c.atoms.push_back(atom);
  }
  return c;
}

std::string to_string(const ClockConstraint& c, const std::vector<std::string>& clocks) {
  if (c.never) return "false";
  if (c.atoms.empty()) return "true";
  std::string out;
  for (const auto& a : c.atoms) {
    if (!out.empty()) out += " & ";
    out += clocks.at(a.clock) + " " + to_string(a.rel) + " " + a.constant.str();
  }
  return out;
}

// ---------------------------------------------------------------- automaton

bool TimedBuchiAutomaton::letter_matches(const TbaEdge& e, std::uint64_t letter) const {
  return eval_letter(*e.letter, letter, propositions);
}

std::vector<std::size_t> TimedBuchiAutomaton::edges_from(std::size_t q) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].from == q) out.push_back(i);
  return out;
}

Rational TimedBuchiAutomaton::max_constant() const {
  Rational m(0);
  for (const auto& e : edges)
    for (const auto& a : e.guard.atoms) m = std::max(m, a.constant);
  return m;
}

bool TimedBuchiAutomaton::has_resets() const {
  return std::any_of(edges.begin(), edges.end(), [](const TbaEdge& e) { return !e.resets.empty(); });
}

bool TimedBuchiAutomaton::is_deterministic() const {
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      if (edges[i].from != edges[j].from) continue;
      if (!jointly_satisfiable(edges[i].guard && edges[j].guard, clocks.size())) continue;
      if (letters_overlap(*edges[i].letter, *edges[j].letter)) return false;
    }
  return true;
}

void TimedBuchiAutomaton::check() const {
  if (states.empty()) throw validation_error("BadTba", "automaton has no states");
  if (initial >= states.size()) throw validation_error("BadTba", "initial state out of range");
  if (accepting.size() != states.size()) throw validation_error("BadTba", "accepting flags do not match states");
  if (propositions.size() > 64) throw validation_error("BadTba", "at most 64 propositions");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    std::string where = "edge " + std::to_string(i);
    if (e.from >= states.size() || e.to >= states.size())
      throw validation_error("BadTba", where + " references an unknown state");
    if (!e.letter || !is_boolean(*e.letter)) throw validation_error("BadTba", where + " letter must be Boolean");
    for (const auto& atom : atoms_of(*e.letter))
      if (std::find(propositions.begin(), propositions.end(), atom) == propositions.end())
        throw validation_error("AlphabetMismatch", where + " uses undeclared proposition '" + atom + "'");
    for (auto r : e.resets)
      if (r >= clocks.size()) throw validation_error("UnknownClock", where + " resets an unknown clock");
    for (const auto& a : e.guard.atoms) {
      if (a.clock >= clocks.size()) throw validation_error("UnknownClock", where + " guards an unknown clock");
      if (a.constant < Rational(0)) throw validation_error("BadConstraint", where + " has a negative constant");
    }
  }
  if (!is_deterministic()) throw validation_error("NondeterministicTba", "two edges from one state overlap");
}

std::vector<Configuration> step(const Configuration& cfg, std::uint64_t letter, const Rational& delta,
                                const TimedBuchiAutomaton& a) {
  std::vector<Configuration> out;
  ClockValuation w = cfg.v;
  for (auto& x : w) x += delta;
  for (const auto& e : a.edges) {
    if (e.from != cfg.q || !a.letter_matches(e, letter) || !eval_constraint(e.guard, w)) continue;
    Configuration next{e.to, w};
    for (auto r : e.resets) next.v[r] = Rational(0);
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<QuantizedStep> step_quantized(std::size_t q, const std::vector<std::int64_t>& v, std::uint64_t letter,
                                          std::int64_t delta, const TimedBuchiAutomaton& a) {
  const std::int64_t cap = a.valuation_cap();
  std::vector<std::int64_t> w = v;
  for (auto& x : w) x = std::min(cap, x + delta);
  std::vector<QuantizedStep> out;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    const auto& e = a.edges[i];
    if (e.from != q || !a.letter_matches(e, letter) || !eval_constraint(e.guard, w)) continue;
    QuantizedStep s{e.to, w, i};
    for (auto r : e.resets) s.v[r] = 0;
    out.push_back(std::move(s));
  }
  return out;
}

bool is_accepting(const std::vector<RunStep>& stem, const std::vector<RunStep>& cycle, const TimedBuchiAutomaton& a) {
  if (cycle.empty()) throw validation_error("InfeasibleRun", "lasso cycle is empty");
  std::size_t index = 0;
  const RunStep* prev = nullptr;
  auto replay = [&](const RunStep& s) {
    if (s.delta <= Rational(0))
      throw validation_error("InfeasibleRun", "step " + std::to_string(index) + " has a non-positive duration");
    if (prev && !(prev->to == s.from))
      throw validation_error("InfeasibleRun", "step " + std::to_string(index) + " does not continue the run");
    auto next = step(s.from, s.letter, s.delta, a);
    if (std::find(next.begin(), next.end(), s.to) == next.end())
      throw validation_error("InfeasibleRun", "step " + std::to_string(index) + " violates the automaton");
    prev = &s;
    ++index;
  };
  if (!stem.empty() && !(stem.front().from.q == a.initial))
    throw validation_error("InfeasibleRun", "step 0 does not start in the initial state");
  for (const auto& s : stem) replay(s);
  for (const auto& s : cycle) replay(s);
  if (cycle.back().to.q != cycle.front().from.q)
    throw validation_error("InfeasibleRun", "step " + std::to_string(index - 1) + " does not close the cycle");
  return std::any_of(cycle.begin(), cycle.end(), [&](const RunStep& s) { return a.accepting[s.to.q]; });
}

std::uint64_t project_letter(std::uint64_t letter, const std::vector<std::string>& from,
                             const std::vector<std::string>& to) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < to.size(); ++i) {
    auto it = std::find(from.begin(), from.end(), to[i]);
    if (it != from.end() && ((letter >> (it - from.begin())) & 1u)) out |= std::uint64_t{1} << i;
  }
  return out;
}

// ---------------------------------------------------------------- fragment

namespace {

struct Component {
  Interval interval;
  FormulaPtr lhs, rhs;
  bool negated = false;
};

FormulaPtr strip_double_negation(FormulaPtr f) {
  while (f->op == Op::Not && f->kids[0]->op == Op::Not) f = f->kids[0]->kids[0];
  return f;
}

void collect_components(const FormulaPtr& raw, std::vector<Component>& out) {
  FormulaPtr f = strip_double_negation(raw);
  if (f->op == Op::True) return;
  if (f->op == Op::And) {
    collect_components(f->kids[0], out);
    collect_components(f->kids[1], out);
    return;
  }
  bool negated = false;
  FormulaPtr u = f;
  if (f->op == Op::Not) {
    negated = true;
    u = f->kids[0];
  }
  if (u->op != Op::Until) {
    if (is_boolean(*f))
      throw unsupported_error("UnsupportedFragment",
                              "Boolean constraint outside every temporal operator: '" + to_string(*raw) +
                                  "' (the initial state's label is never read)");
    throw unsupported_error("UnsupportedFragment", "only conjunctions of temporal operators are supported: '" +
                                                       to_string(*raw) + "'");
  }
  if (!u->interval.hi) throw unsupported_error("UnsupportedFragment", "unbounded interval in '" + to_string(*u) + "'");
  if (!is_boolean(*u->kids[0]) || !is_boolean(*u->kids[1]))
    throw unsupported_error("UnsupportedFragment", "nested temporal operator in '" + to_string(*u) + "'");
  out.push_back({u->interval, u->kids[0], u->kids[1], negated});
}

enum Local { kWait = 0, kHit = 1, kMiss = 2 };

struct LocalEdge {
  FormulaPtr letter;
  ClockConstraint guard;
  Local to;
};

// Edges out of the waiting state of one Until component, all on clock `clock`.
std::vector<LocalEdge> component_edges(const Component& c, std::size_t clock) {
  const Rational a = c.interval.lo, b = *c.interval.hi;
  auto atom = [&](Rel r, const Rational& k) { return ClockConstraint{{ClockAtom{clock, r, k}}, false}; };
  const FormulaPtr p1 = c.lhs, p2 = c.rhs, n1 = mk_not(c.lhs), n2 = mk_not(c.rhs);
  std::vector<LocalEdge> e;
  e.push_back({p2, atom(Rel::Ge, a) && atom(Rel::Le, b), kHit});
  if (a > Rational(0)) e.push_back({mk_and(p1, p2), atom(Rel::Lt, a), kWait});
  e.push_back({mk_and(p1, n2), atom(Rel::Lt, b), kWait});
  if (a > Rational(0)) e.push_back({mk_and(p2, n1), atom(Rel::Lt, a), kMiss});
  e.push_back({p2, atom(Rel::Gt, b), kMiss});
  e.push_back({mk_and(n2, p1), atom(Rel::Ge, b), kMiss});
  e.push_back({mk_and(n1, n2), ClockConstraint::truth(), kMiss});
  e.erase(std::remove_if(e.begin(), e.end(), [](const LocalEdge& x) { return is_false(x.letter); }), e.end());
  return e;
}

}  // namespace

TimedBuchiAutomaton tba_from_fragment(const FormulaPtr& f) {
  FormulaPtr n = normalize(f);
  std::vector<Component> comps;
  collect_components(n, comps);

  TimedBuchiAutomaton a;
  a.propositions = atoms_of(*n);
  if (a.propositions.size() > 64) throw unsupported_error("UnsupportedFragment", "more than 64 propositions");
  if (comps.empty()) {
    a.states = {"acc"};
    a.accepting = {true};
    a.edges.push_back({0, 0, Formula::truth(), {}, ClockConstraint::truth()});
    return a;
  }
  const std::size_t k = comps.size();
  for (std::size_t i = 0; i < k; ++i) a.clocks.push_back("c" + std::to_string(i + 1));
  std::vector<std::vector<LocalEdge>> local(k);
  for (std::size_t i = 0; i < k; ++i) local[i] = component_edges(comps[i], i);

  // Composite state: per component, false = waiting, true = settled favourably.
  using Tuple = std::vector<bool>;
  const std::size_t kAcc = 1, kRej = 2;
  std::map<Tuple, std::size_t> index;
  std::vector<Tuple> order;
  auto name_of = [&](const Tuple& t) {
    if (k == 1) return std::string("q0");
    std::string s = "q_";
    for (bool b : t) s += b ? 'g' : 'w';
    return s;
  };
  a.states = {name_of(Tuple(k, false)), "acc", "rej"};
  a.accepting = {false, true, false};
  index[Tuple(k, false)] = 0;
  order.push_back(Tuple(k, false));
  for (std::size_t cur = 0; cur < order.size(); ++cur) {
    const Tuple t = order[cur];
    const std::size_t from = index[t];
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < k; ++i)
      if (!t[i]) live.push_back(i);
    std::vector<std::size_t> pick(live.size(), 0);
    for (;;) {
      FormulaPtr letter = Formula::truth();
      ClockConstraint guard;
      Tuple next = t;
      bool bad = false;
      for (std::size_t j = 0; j < live.size(); ++j) {
        const LocalEdge& e = local[live[j]][pick[j]];
        letter = mk_and(letter, e.letter);
        guard = guard && e.guard;
        if (e.to == kHit) next[live[j]] = !comps[live[j]].negated ? true : (bad = true);
        if (e.to == kMiss) next[live[j]] = comps[live[j]].negated ? true : (bad = true);
      }
      if (!is_false(letter)) {
        std::size_t to;
        if (bad) {
          to = kRej;
        } else if (std::all_of(next.begin(), next.end(), [](bool b) { return b; })) {
          to = kAcc;
        } else if (auto it = index.find(next); it != index.end()) {
          to = it->second;
        } else {
          to = a.states.size();
          index[next] = to;
          order.push_back(next);
          a.states.push_back(name_of(next));
          a.accepting.push_back(false);
        }
        a.edges.push_back({from, to, letter, {}, guard});
      }
      std::size_t j = 0;
      while (j < live.size() && ++pick[j] == local[live[j]].size()) pick[j++] = 0;
      if (j == live.size()) break;
    }
  }
  a.edges.push_back({kAcc, kAcc, Formula::truth(), {}, ClockConstraint::truth()});
  a.edges.push_back({kRej, kRej, Formula::truth(), {}, ClockConstraint::truth()});
  return a;
}

// ---------------------------------------------------------------- prefix analysis

Verdict prefix_verdict(const TimedBuchiAutomaton& a, const TimedWord& w) {
  w.check();
  if (a.has_resets()) throw unsupported_error("UnsupportedAnalysis", "prefix analysis needs a reset-free automaton");
  if (a.propositions.size() > 16)
    throw unsupported_error("UnsupportedAnalysis", "prefix analysis enumerates letters; at most 16 propositions");

  Configuration cfg{a.initial, ClockValuation(a.clocks.size(), Rational(0))};
  Rational prev(0);
  for (std::size_t j = 0; j < w.times.size(); ++j) {
    Rational delta = w.times[j] - prev;
    if (delta <= Rational(0)) throw validation_error("MalformedWord", "positions must have positive timestamps");
    auto next = step(cfg, project_letter(w.letters[j], w.propositions, a.propositions), delta, a);
    if (next.empty()) return Verdict::Violated;
    cfg = next.front();
    prev = w.times[j];
  }
  const Rational lower = w.horizon - prev;  // future letters arrive after this delay

  // Delays at which some guard changes truth value, restricted to (lower, inf).
  std::set<Rational> critical;
  for (const auto& e : a.edges)
    for (const auto& atom : e.guard.atoms) {
      Rational d = atom.constant - cfg.v[atom.clock];
      if (d > lower) critical.insert(d);
    }
  // Regions alternate open interval, point, open interval, ..., last open is unbounded.
  struct Region {
    Rational rep;
    bool point;
  };
  std::vector<Region> regions;
  Rational left = lower;
  for (const auto& c : critical) {
    regions.push_back({(left + c) / Rational(2), false});
    regions.push_back({c, true});
    left = c;
  }
  regions.push_back({left + Rational(1), false});
  const std::size_t tail = regions.size() - 1;
  const std::size_t nq = a.states.size();
  const std::uint64_t nletters = std::uint64_t{1} << a.propositions.size();

  auto node = [&](std::size_t q, std::size_t r) { return r * nq + q; };
  std::vector<char> seen(regions.size() * nq, 0);
  std::vector<std::vector<std::size_t>> tail_succ(nq);
  bool deadlock = false;

  // Successor of configuration q reading `letter` at delay region r.
  auto succ = [&](std::size_t q, std::size_t r, std::uint64_t letter) -> std::optional<std::size_t> {
    Configuration c{q, cfg.v};
    auto next = step(c, letter, regions[r].rep, a);
    if (next.empty()) return std::nullopt;
    return next.front().q;
  };

  std::vector<std::size_t> stack;
  auto expand_from = [&](std::size_t q, std::size_t first_region) {
    for (std::size_t r = first_region; r < regions.size(); ++r)
      for (std::uint64_t m = 0; m < nletters; ++m) {
        auto q2 = succ(q, r, m);
        if (!q2) {
          deadlock = true;
          continue;
        }
        std::size_t id = node(*q2, r);
        if (!seen[id]) {
          seen[id] = 1;
          stack.push_back(id);
        }
      }
  };
  expand_from(cfg.q, 0);
  while (!stack.empty()) {
    std::size_t id = stack.back();
    stack.pop_back();
    std::size_t q = id % nq, r = id / nq;
    expand_from(q, regions[r].point ? r + 1 : r);
  }
  // Tail graph: configurations inside the unbounded region, letters read there.
  std::vector<char> in_tail(nq, 0);
  for (std::size_t q = 0; q < nq; ++q) {
    if (!seen[node(q, tail)]) continue;
    in_tail[q] = 1;
    for (std::uint64_t m = 0; m < nletters; ++m)
      if (auto q2 = succ(q, tail, m)) tail_succ[q].push_back(*q2);
  }

  // Cycle detection restricted to a vertex subset.
  auto has_cycle = [&](const std::vector<char>& allowed) {
    std::vector<int> color(nq, 0);
    std::function<bool(std::size_t)> dfs = [&](std::size_t u) {
      color[u] = 1;
      for (auto v : tail_succ[u]) {
        if (!allowed[v]) continue;
        if (color[v] == 1) return true;
        if (color[v] == 0 && dfs(v)) return true;
      }
      color[u] = 2;
      return false;
    };
    for (std::size_t q = 0; q < nq; ++q)
      if (allowed[q] && color[q] == 0 && dfs(q)) return true;
    return false;
  };
  std::vector<char> rejecting(nq, 0);
  for (std::size_t q = 0; q < nq; ++q) rejecting[q] = in_tail[q] && !a.accepting[q];
  const bool all_accepted = !deadlock && !has_cycle(rejecting);

  // Some run visits F infinitely often iff an accepting tail state reaches itself.
  bool some_accepted = false;
  for (std::size_t f = 0; f < nq && !some_accepted; ++f) {
    if (!in_tail[f] || !a.accepting[f]) continue;
    std::vector<char> vis(nq, 0);
    std::vector<std::size_t> st(tail_succ[f].begin(), tail_succ[f].end());
    while (!st.empty()) {
      std::size_t u = st.back();
      st.pop_back();
      if (u == f) {
        some_accepted = true;
        break;
      }
      if (vis[u]) continue;
      vis[u] = 1;
      for (auto v : tail_succ[u]) st.push_back(v);
    }
  }
  if (all_accepted) return Verdict::Satisfied;
  if (!some_accepted) return Verdict::Violated;
  return Verdict::Inconclusive;
}

}  // namespace mitlgame
