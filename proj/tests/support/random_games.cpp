#include "random_games.hpp"

#include <algorithm>
#include <numeric>

namespace testsupport {

using namespace mitlgame;

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
  // Integer weights over a power-of-two total keep every probability dyadic.
  const std::size_t total = 16;
  std::vector<std::size_t> w(n, 0);
  for (std::size_t i = 0; i < total; ++i) ++w[uniform(rng, 0, n - 1)];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(w[i]) / total;
  return out;
}

Game random_game(std::mt19937_64& rng, const GameShape& shape) {
  Game z;
  const std::size_t n = uniform(rng, shape.min_states, shape.max_states);
  const std::size_t ends = shape.absorbing_ends && n >= 3 ? 2 : 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (s + ends >= n) {
      const bool goal = s + 1 == n;
      z.add_state(1, 1, {Block{{static_cast<std::uint32_t>(s), 1.0}}}, goal, goal ? "goal" : "trap");
      continue;
    }
    std::size_t rows = shape.exact_rows ? shape.max_rows : uniform(rng, 1, shape.max_rows);
    std::size_t cols = shape.exact_rows ? shape.max_cols : uniform(rng, 1, shape.max_cols);
    if (shape.turn_based) {
      if (uniform(rng, 0, 1) == 0) rows = 1;
      else cols = 1;
    }
    std::vector<Block> matrix(rows * cols);
    for (auto& b : matrix) {
      const std::size_t k = uniform(rng, 1, std::min(shape.max_successors, n));
      std::vector<std::uint32_t> succ(n);
      std::iota(succ.begin(), succ.end(), 0u);
      std::shuffle(succ.begin(), succ.end(), rng);
      succ.resize(k);
      std::sort(succ.begin(), succ.end());
      auto p = random_distribution(rng, k);
      for (std::size_t i = 0; i < k; ++i)
        if (p[i] > 0) b.push_back({succ[i], p[i]});
    }
    const bool acc = std::bernoulli_distribution(shape.accepting_probability)(rng);
    z.add_state(rows, cols, matrix, acc, "s" + std::to_string(s));
  }
  z.initial = 0;
  return z;
}

Dsg random_dsg(std::mt19937_64& rng, std::size_t states, std::size_t nc, std::size_t na) {
  Dsg g;
  for (std::size_t s = 0; s < states; ++s) g.states.push_back("s" + std::to_string(s));
  g.initial = 0;
  g.propositions = {"p", "q"};
  for (std::size_t s = 0; s < states; ++s) g.labels.push_back(uniform(rng, 0, 3));
  for (std::size_t c = 0; c < nc; ++c) g.defender_actions.push_back("c" + std::to_string(c));
  for (std::size_t a = 0; a < na; ++a) g.adversary_actions.push_back("a" + std::to_string(a));
  std::vector<std::size_t> all_c(nc), all_a(na);
  std::iota(all_c.begin(), all_c.end(), 0);
  std::iota(all_a.begin(), all_a.end(), 0);
  g.defender_of.assign(states, all_c);
  g.adversary_of.assign(states, all_a);
  g.kernel.resize(states);
  for (std::size_t s = 0; s < states; ++s) {
    g.kernel[s].resize(nc * na);
    for (auto& row : g.kernel[s]) {
      const std::size_t k = uniform(rng, 1, std::min<std::size_t>(2, states));
      std::vector<std::size_t> succ(states);
      std::iota(succ.begin(), succ.end(), 0);
      std::shuffle(succ.begin(), succ.end(), rng);
      succ.resize(k);
      std::sort(succ.begin(), succ.end());
      const auto p = random_distribution(rng, k);
      for (std::size_t i = 0; i < k; ++i) {
        if (p[i] == 0) continue;
        Outcome o;
        o.to = succ[i];
        o.p = p[i];
        const std::size_t nd = uniform(rng, 1, 2);
        const std::int64_t d0 = static_cast<std::int64_t>(uniform(rng, 1, 2));
        if (nd == 1) o.durations = {{d0, 1.0}};
        else o.durations = {{d0, 0.5}, {d0 + 1, 0.5}};
        row.push_back(std::move(o));
      }
    }
  }
  return g;
}

namespace {

FormulaPtr random_boolean(std::mt19937_64& rng, const std::vector<std::string>& props) {
  auto atom = [&] { return Formula::make_atom(props[uniform(rng, 0, props.size() - 1)]); };
  switch (uniform(rng, 0, 6)) {
    case 0: return Formula::truth();
    case 1: return Formula::negate(atom());
    case 2: return Formula::conj(atom(), atom());
    case 3: return Formula::disj(atom(), Formula::negate(atom()));
    default: return atom();
  }
}

Interval random_interval(std::mt19937_64& rng) {
  // Half-integer bounds in [0, 4]; lo < hi.
  const std::int64_t a = static_cast<std::int64_t>(uniform(rng, 0, 6));
  const std::int64_t b = a + static_cast<std::int64_t>(uniform(rng, 1, 4));
  return Interval{Rational(a, 2), Rational(b, 2)};
}

FormulaPtr random_temporal(std::mt19937_64& rng, const std::vector<std::string>& props) {
  FormulaPtr f;
  switch (uniform(rng, 0, 2)) {
    case 0: f = Formula::until(random_interval(rng), random_boolean(rng, props), random_boolean(rng, props)); break;
    case 1: f = Formula::eventually(random_interval(rng), random_boolean(rng, props)); break;
    default: f = Formula::always(random_interval(rng), random_boolean(rng, props)); break;
  }
  return uniform(rng, 0, 3) == 0 ? Formula::negate(f) : f;
}

}  // namespace

FormulaPtr random_fragment_formula(std::mt19937_64& rng, const std::vector<std::string>& props) {
  FormulaPtr f = random_temporal(rng, props);
  if (uniform(rng, 0, 1) == 1) f = Formula::conj(f, random_temporal(rng, props));
  return f;
}

TimedWord random_word(std::mt19937_64& rng, const std::vector<std::string>& props, std::int64_t max_time) {
  TimedWord w;
  w.propositions = props;
  const std::uint64_t letters = std::uint64_t{1} << props.size();
  std::int64_t t = static_cast<std::int64_t>(uniform(rng, 1, 2));  // in halves; positions start after 0
  while (t <= 2 * max_time) {
    w.times.push_back(Rational(t, 2));
    w.letters.push_back(std::uniform_int_distribution<std::uint64_t>(0, letters - 1)(rng));
    t += static_cast<std::int64_t>(uniform(rng, 1, 3));
  }
  const std::int64_t extra = static_cast<std::int64_t>(uniform(rng, 0, 2));
  w.horizon = w.times.back() + Rational(extra, 2);
  return w;
}

}  // namespace testsupport
