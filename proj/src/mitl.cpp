#include "mitlgame/mitl.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "mitlgame/error.hpp"

namespace mitlgame {

FormulaPtr Formula::truth() {
  auto f = std::make_shared<Formula>();
  f->op = Op::True;
  return f;
}
FormulaPtr Formula::make_atom(std::string name) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Atom;
  f->atom = std::move(name);
  return f;
}
FormulaPtr Formula::negate(FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Not;
  f->kids = {std::move(a)};
  return f;
}
namespace {
FormulaPtr binary(Op op, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->kids = {std::move(a), std::move(b)};
  return f;
}
FormulaPtr temporal(Op op, Interval i, std::vector<FormulaPtr> kids) {
  if (i.hi && !(i.lo < *i.hi))
    throw validation_error("EmptyInterval", "interval [" + i.lo.str() + "," + i.hi->str() + "] needs a < b");
  if (i.lo < Rational(0)) throw validation_error("EmptyInterval", "interval bounds must be non-negative");
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->interval = std::move(i);
  f->kids = std::move(kids);
  return f;
}
}  // namespace
FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) { return binary(Op::And, std::move(a), std::move(b)); }
FormulaPtr Formula::disj(FormulaPtr a, FormulaPtr b) { return binary(Op::Or, std::move(a), std::move(b)); }
FormulaPtr Formula::implies(FormulaPtr a, FormulaPtr b) { return binary(Op::Implies, std::move(a), std::move(b)); }
FormulaPtr Formula::until(Interval i, FormulaPtr a, FormulaPtr b) {
  return temporal(Op::Until, std::move(i), {std::move(a), std::move(b)});
}
FormulaPtr Formula::eventually(Interval i, FormulaPtr a) { return temporal(Op::Eventually, std::move(i), {std::move(a)}); }
FormulaPtr Formula::always(Interval i, FormulaPtr a) { return temporal(Op::Always, std::move(i), {std::move(a)}); }

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.op != b.op || a.atom != b.atom || a.kids.size() != b.kids.size()) return false;
  if ((a.op == Op::Until || a.op == Op::Eventually || a.op == Op::Always) && !(a.interval == b.interval)) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!structurally_equal(*a.kids[i], *b.kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------- parsing

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBracket, RBracket, Comma, Not, And, Or, Arrow, Rel, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto fail = [&](const std::string& what) {
    throw validation_error("SyntaxError", std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    int l = line, cl = col;
    auto push = [&](Tok k, std::size_t n) {
      out.push_back({k, std::string(s.substr(i, n)), l, cl});
      advance(n);
    };
    if (c == '(') push(Tok::LParen, 1);
    else if (c == ')') push(Tok::RParen, 1);
    else if (c == '[') push(Tok::LBracket, 1);
    else if (c == ']') push(Tok::RBracket, 1);
    else if (c == ',') push(Tok::Comma, 1);
    else if (c == '!') push(Tok::Not, 1);
    else if (c == '&') push(Tok::And, 1);
    else if (c == '|') push(Tok::Or, 1);
    else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') push(Tok::Arrow, 2);
    else if (c == '<' || c == '>') push(Tok::Rel, (i + 1 < s.size() && s[i + 1] == '=') ? 2 : 1);
    else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
      std::size_t j = i + (c == '-' ? 1 : 0);
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' || s[j] == '/')) ++j;
      if (j == i + 1 && c == '-') fail("unexpected '-'");
      push(Tok::Number, j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.')) ++j;
      push(Tok::Ident, j - i);
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const Vocabulary& vocab) : toks_(std::move(toks)), vocab_(vocab) {}

  FormulaPtr parse_all() {
    FormulaPtr f = implication();
    if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const Token& t, const std::string& what) const {
    throw validation_error("SyntaxError", std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + what);
  }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(peek(), std::string("expected ") + what);
    take();
  }
  bool is_temporal_keyword(const char* kw) const {
    return peek().kind == Tok::Ident && peek().text == kw && peek(1).kind == Tok::LBracket;
  }

  FormulaPtr implication() {
    FormulaPtr lhs = disjunction();
    if (peek().kind == Tok::Arrow) {
      take();
      return Formula::implies(lhs, implication());
    }
    return lhs;
  }
  FormulaPtr disjunction() {
    FormulaPtr f = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      f = Formula::disj(f, conjunction());
    }
    return f;
  }
  FormulaPtr conjunction() {
    FormulaPtr f = until();
    while (peek().kind == Tok::And) {
      take();
      f = Formula::conj(f, until());
    }
    return f;
  }
  FormulaPtr until() {
    FormulaPtr lhs = unary();
    if (is_temporal_keyword("U")) {
      take();
      Interval i = interval();
      return Formula::until(std::move(i), lhs, until());
    }
    return lhs;
  }
  FormulaPtr unary() {
    if (peek().kind == Tok::Not) {
      take();
      return Formula::negate(unary());
    }
    if (is_temporal_keyword("F")) {
      take();
      Interval i = interval();
      return Formula::eventually(std::move(i), unary());
    }
    if (is_temporal_keyword("G")) {
      take();
      Interval i = interval();
      return Formula::always(std::move(i), unary());
    }
    return primary();
  }
  FormulaPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      take();
      FormulaPtr f = implication();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind != Tok::Ident) fail(t, "expected a proposition, 'true', 'false' or '('");
    Token id = take();
    if (id.text == "true") return Formula::truth();
    if (id.text == "false") return Formula::negate(Formula::truth());
    if (peek().kind == Tok::Rel) {
      Token rel = take();
      if (peek().kind != Tok::Number) fail(peek(), "expected a number after '" + rel.text + "'");
      Token num = take();
      Rational::parse(num.text);
      if (!vocab_.variables.count(id.text))
        throw validation_error("UndeclaredAtom", std::to_string(id.line) + ":" + std::to_string(id.col) +
                                                     ": unknown state variable '" + id.text + "'");
      return Formula::make_atom(id.text + rel.text + num.text);
    }
    if (!vocab_.atoms.count(id.text))
      throw validation_error("UndeclaredAtom", std::to_string(id.line) + ":" + std::to_string(id.col) +
                                                   ": undeclared proposition '" + id.text + "'");
    return Formula::make_atom(id.text);
  }
  Rational number(const char* what) {
    if (peek().kind != Tok::Number) fail(peek(), std::string("expected ") + what);
    Token t = take();
    try {
      return Rational::parse(t.text);
    } catch (const Error& e) {
      fail(t, e.what());
    }
  }
  Interval interval() {
    expect(Tok::LBracket, "'['");
    Interval i;
    i.lo = number("interval lower bound");
    expect(Tok::Comma, "','");
    if (peek().kind == Tok::Ident && peek().text == "inf") {
      take();
    } else {
      i.hi = number("interval upper bound");
    }
    const Token& close = peek();
    expect(Tok::RBracket, "']'");
    if (i.hi && !(i.lo < *i.hi))
      throw validation_error("EmptyInterval", std::to_string(close.line) + ":" + std::to_string(close.col) +
                                                  ": interval [" + i.lo.str() + "," + i.hi->str() + "] needs a < b");
    return i;
  }

  std::vector<Token> toks_;
  const Vocabulary& vocab_;
  std::size_t pos_ = 0;
};

int precedence(Op op) {
  switch (op) {
    case Op::Implies: return 1;
    case Op::Or: return 2;
    case Op::And: return 3;
    case Op::Until: return 4;
    case Op::Not:
    case Op::Eventually:
    case Op::Always: return 5;
    default: return 6;
  }
}

std::string interval_str(const Interval& i) {
  return "[" + i.lo.str() + "," + (i.hi ? i.hi->str() : std::string("inf")) + "]";
}

void print(const Formula& f, std::string& out);

void print_wrapped(const Formula& f, bool wrap, std::string& out) {
  if (wrap) out += "(";
  print(f, out);
  if (wrap) out += ")";
}

void print(const Formula& f, std::string& out) {
  const int p = precedence(f.op);
  switch (f.op) {
    case Op::True: out += "true"; break;
    case Op::Atom: out += f.atom; break;
    case Op::Not:
      if (f.kids[0]->op == Op::True) {
        out += "false";
      } else {
        out += "!";
        print_wrapped(*f.kids[0], precedence(f.kids[0]->op) < p, out);
      }
      break;
    case Op::And:
    case Op::Or: {
      print_wrapped(*f.kids[0], precedence(f.kids[0]->op) < p, out);
      out += f.op == Op::And ? " & " : " | ";
      print_wrapped(*f.kids[1], precedence(f.kids[1]->op) <= p, out);
      break;
    }
    case Op::Implies:
      print_wrapped(*f.kids[0], precedence(f.kids[0]->op) <= p, out);
      out += " -> ";
      print_wrapped(*f.kids[1], precedence(f.kids[1]->op) < p, out);
      break;
    case Op::Until:
      print_wrapped(*f.kids[0], precedence(f.kids[0]->op) <= p, out);
      out += " U" + interval_str(f.interval) + " ";
      print_wrapped(*f.kids[1], precedence(f.kids[1]->op) < p, out);
      break;
    case Op::Eventually:
    case Op::Always:
      out += (f.op == Op::Eventually ? "F" : "G") + interval_str(f.interval) + " ";
      print_wrapped(*f.kids[0], true, out);
      break;
  }
}

}  // namespace

FormulaPtr parse_mitl(std::string_view text, const Vocabulary& vocab) {
  Parser p(lex(text), vocab);
  return p.parse_all();
}

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

FormulaPtr normalize(const FormulaPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::Atom: return f;
    case Op::Not: return Formula::negate(normalize(f->kids[0]));
    case Op::And: return Formula::conj(normalize(f->kids[0]), normalize(f->kids[1]));
    case Op::Or:
      return Formula::negate(
          Formula::conj(Formula::negate(normalize(f->kids[0])), Formula::negate(normalize(f->kids[1]))));
    case Op::Implies: {
      // a -> b := !a | b := !(!!a & !b)
      FormulaPtr na = Formula::negate(normalize(f->kids[0]));
      return Formula::negate(Formula::conj(Formula::negate(na), Formula::negate(normalize(f->kids[1]))));
    }
    case Op::Until: return Formula::until(f->interval, normalize(f->kids[0]), normalize(f->kids[1]));
    case Op::Eventually: return Formula::until(f->interval, Formula::truth(), normalize(f->kids[0]));
    case Op::Always:
      return Formula::negate(
          Formula::until(f->interval, Formula::truth(), Formula::negate(normalize(f->kids[0]))));
  }
  return f;
}

std::optional<Comparison> parse_comparison_atom(std::string_view name) {
  for (const char* rel : {"<=", ">=", "<", ">"}) {
    auto at = name.find(rel);
    if (at == std::string_view::npos || at == 0) continue;
    std::string_view rest = name.substr(at + std::char_traits<char>::length(rel));
    if (rest.empty()) continue;
    Comparison c;
    c.variable = std::string(name.substr(0, at));
    c.relation = rel;
    try {
      c.threshold = Rational::parse(rest).to_double();
    } catch (const Error&) {
      return std::nullopt;
    }
    return c;
  }
  return std::nullopt;
}

namespace {
void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op == Op::Atom) out.insert(f.atom);
  for (const auto& k : f.kids) collect_atoms(*k, out);
}
}  // namespace

std::vector<std::string> atoms_of(const Formula& f) {
  std::set<std::string> s;
  collect_atoms(f, s);
  return {s.begin(), s.end()};
}

std::optional<Rational> horizon_bound(const Formula& f) {
  Rational best(0);
  for (const auto& k : f.kids) {
    auto h = horizon_bound(*k);
    if (!h) return std::nullopt;
    best = std::max(best, *h);
  }
  if (f.op == Op::Until || f.op == Op::Eventually || f.op == Op::Always) {
    if (!f.interval.hi) return std::nullopt;
    best += *f.interval.hi;
  }
  return best;
}

// ---------------------------------------------------------------- timed words

void TimedWord::check() const {
  if (letters.size() != times.size())
    throw validation_error("MalformedWord", "letters and times differ in length");
  if (propositions.size() > 64) throw validation_error("MalformedWord", "at most 64 propositions");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < Rational(0)) throw validation_error("MalformedWord", "negative timestamp");
    if (i > 0 && !(times[i - 1] < times[i]))
      throw validation_error("MalformedWord", "timestamps must strictly increase at position " + std::to_string(i));
  }
  if (!times.empty() && horizon < times.back())
    throw validation_error("MalformedWord", "horizon precedes the last timestamp");
}

bool TimedWord::holds(std::size_t position, std::string_view atom) const {
  for (std::size_t b = 0; b < propositions.size(); ++b)
    if (propositions[b] == atom) return (letters[position] >> b) & 1u;
  return false;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------- evaluation

namespace {

enum class K : std::uint8_t { F, T, U };

K k_not(K a) { return a == K::T ? K::F : a == K::F ? K::T : K::U; }
K k_and(K a, K b) {
  if (a == K::F || b == K::F) return K::F;
  if (a == K::T && b == K::T) return K::T;
  return K::U;
}
K k_or(K a, K b) { return k_not(k_and(k_not(a), k_not(b))); }

class Evaluator {
 public:
  explicit Evaluator(const TimedWord& w) : w_(w) {
    for (std::size_t b = 0; b < w.propositions.size(); ++b) bit_[w.propositions[b]] = b;
  }

  // position: index whose time equals t, or npos when t carries no position.
  K at(const Formula& f, const Rational& t, std::size_t position) const {
    switch (f.op) {
      case Op::True: return K::T;
      case Op::Atom: {
        if (position == npos) return t <= w_.horizon ? K::F : K::U;
        auto it = bit_.find(f.atom);
        if (it == bit_.end()) return K::F;
        return ((w_.letters[position] >> it->second) & 1u) ? K::T : K::F;
      }
      case Op::Not: return k_not(at(*f.kids[0], t, position));
      case Op::And: {
        K a = at(*f.kids[0], t, position);
        if (a == K::F) return K::F;
        return k_and(a, at(*f.kids[1], t, position));
      }
      case Op::Or: {
        K a = at(*f.kids[0], t, position);
        if (a == K::T) return K::T;
        return k_or(a, at(*f.kids[1], t, position));
      }
      case Op::Implies: {
        K a = at(*f.kids[0], t, position);
        if (a == K::F) return K::T;
        return k_or(k_not(a), at(*f.kids[1], t, position));
      }
      case Op::Until: return until(f.interval, f.kids[0].get(), *f.kids[1], t);
      case Op::Eventually: return until(f.interval, nullptr, *f.kids[0], t);
      case Op::Always: return always(f.interval, *f.kids[0], t);
    }
    return K::U;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t position_of(const Rational& t) const {
    auto it = std::lower_bound(w_.times.begin(), w_.times.end(), t);
    if (it != w_.times.end() && *it == t) return static_cast<std::size_t>(it - w_.times.begin());
    return npos;
  }

 private:
  bool window_reaches_future(const Interval& i, const Rational& t) const {
    return !i.hi || t + *i.hi > w_.horizon;
  }

  // lhs == nullptr stands for true.
  K until(const Interval& i, const Formula* lhs, const Formula& rhs, const Rational& t) const {
    K result = K::F, prefix = K::T;
    auto j = static_cast<std::size_t>(std::lower_bound(w_.times.begin(), w_.times.end(), t) - w_.times.begin());
    for (; j < w_.times.size(); ++j) {
      Rational d = w_.times[j] - t;
      if (i.hi && d > *i.hi) return result;
      if (d >= i.lo) result = k_or(result, k_and(prefix, at(rhs, w_.times[j], j)));
      if (result == K::T) return result;
      if (lhs) prefix = k_and(prefix, at(*lhs, w_.times[j], j));
      if (prefix == K::F) return result;
    }
    if (window_reaches_future(i, t)) result = k_or(result, k_and(prefix, K::U));
    return result;
  }

  K always(const Interval& i, const Formula& arg, const Rational& t) const {
    K result = K::T;
    auto j = static_cast<std::size_t>(std::lower_bound(w_.times.begin(), w_.times.end(), t) - w_.times.begin());
    for (; j < w_.times.size(); ++j) {
      Rational d = w_.times[j] - t;
      if (i.hi && d > *i.hi) return result;
      if (d >= i.lo) result = k_and(result, at(arg, w_.times[j], j));
      if (result == K::F) return result;
    }
    if (window_reaches_future(i, t)) result = k_and(result, K::U);
    return result;
  }

  const TimedWord& w_;
  std::map<std::string, std::size_t, std::less<>> bit_;
};

}  // namespace

Verdict evaluate(const Formula& f, const TimedWord& w, const Rational& t) {
  Evaluator ev(w);
  K k = ev.at(f, t, ev.position_of(t));
  return k == K::T ? Verdict::Satisfied : k == K::F ? Verdict::Violated : Verdict::Inconclusive;
}

}  // namespace mitlgame
