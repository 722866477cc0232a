#include "mitlgame/product.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>

#include "mitlgame/error.hpp"

namespace mitlgame {

std::vector<std::size_t> alphabet_map(const Dsg& g, const TimedBuchiAutomaton& a) {
  std::vector<std::size_t> map;
  for (const auto& p : a.propositions) {
    std::size_t i = g.proposition_index(p);
    if (i == g.propositions.size())
      throw validation_error("AlphabetMismatch", "automaton reads '" + p + "' which the game does not declare");
    map.push_back(i);
  }
  return map;
}

std::uint64_t automaton_letter(std::uint64_t label, const std::vector<std::size_t>& map) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < map.size(); ++i)
    if ((label >> map[i]) & 1u) out |= std::uint64_t{1} << i;
  return out;
}

namespace {
std::string state_name(const ProductState& st, const Dsg& g, const TimedBuchiAutomaton& a) {
  if (st.violation()) return "violation";
  std::string s = "(" + g.states[static_cast<std::size_t>(st.s)] + "," + a.states[st.q] + ",[";
  for (std::size_t i = 0; i < st.v.size(); ++i) s += (i ? "," : "") + std::to_string(st.v[i]);
  return s + "])";
}
}  // namespace

std::string ProductGame::name(std::size_t i, const Dsg& g, const TimedBuchiAutomaton& a) const {
  return state_name(states[i], g, a);
}

ProductGame build_product(const Dsg& g, const TimedBuchiAutomaton& a) {
  require_valid(g);
  if (!g.clocks.empty() && g.clocks != a.clocks)
    throw validation_error("ClockSetMismatch", "game and automaton declare different clocks");
  const auto map = alphabet_map(g, a);
  const std::int64_t cap = a.valuation_cap();

  using Key = std::tuple<std::size_t, std::vector<std::int64_t>, std::uint64_t, std::int64_t>;
  std::map<Key, std::optional<std::pair<std::size_t, std::vector<std::int64_t>>>> memo;
  auto advance = [&](std::size_t q, const std::vector<std::int64_t>& v, std::uint64_t letter, std::int64_t d) {
    Key k{q, v, letter, d};
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    auto next = step_quantized(q, v, letter, d, a);
    std::optional<std::pair<std::size_t, std::vector<std::int64_t>>> r;
    if (!next.empty()) r = std::make_pair(next.front().q, next.front().v);
    memo.emplace(std::move(k), r);
    return r;
  };

  std::map<ProductState, std::size_t> index;
  std::vector<ProductState> order;
  std::vector<std::vector<std::map<std::size_t, double>>> rows;
  auto intern = [&](const ProductState& st) {
    auto [it, fresh] = index.emplace(st, order.size());
    if (fresh) {
      order.push_back(st);
      rows.emplace_back();
    }
    return it->second;
  };
  const ProductState violation{-1, 0, {}};
  intern(ProductState{static_cast<std::int64_t>(g.initial), a.initial, std::vector<std::int64_t>(a.clocks.size(), 0)});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const ProductState st = order[i];
    if (st.violation()) {
      rows[i] = {{{i, 1.0}}};
      continue;
    }
    const auto s = static_cast<std::size_t>(st.s);
    std::vector<std::map<std::size_t, double>> out(g.nc(s) * g.na(s));
    for (std::size_t c = 0; c < g.nc(s); ++c)
      for (std::size_t u = 0; u < g.na(s); ++u) {
        auto& acc = out[c * g.na(s) + u];
        for (const auto& o : g.row(s, c, u)) {
          if (o.p <= 0) continue;
          const std::uint64_t letter = automaton_letter(g.labels[o.to], map);
          for (const auto& [d, pd] : o.durations) {
            if (pd <= 0) continue;
            auto next = advance(st.q, st.v, letter, d);
            std::size_t j = next ? intern(ProductState{static_cast<std::int64_t>(o.to), next->first, next->second})
                                 : intern(violation);
            acc[j] += o.p * pd;
          }
        }
      }
    rows[i] = std::move(out);
  }

  // Canonical numbering: sort by (s, q, v) with the sink last.
  std::vector<std::size_t> perm(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) {
    const bool vx = order[x].violation(), vy = order[y].violation();
    if (vx != vy) return vy;
    return order[x] < order[y];
  });
  std::vector<std::size_t> rank(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) rank[perm[i]] = i;

  ProductGame p;
  p.cap = cap;
  p.initial = rank[0];
  for (std::size_t i : perm) {
    const ProductState& st = order[i];
    p.states.push_back(st);
    p.accepting.push_back(!st.violation() && a.accepting[st.q]);
    if (st.violation()) {
      p.violation = p.states.size() - 1;
      p.nc.push_back(1);
      p.na.push_back(1);
    } else {
      p.nc.push_back(g.nc(static_cast<std::size_t>(st.s)));
      p.na.push_back(g.na(static_cast<std::size_t>(st.s)));
    }
    std::vector<Row> krows;
    for (const auto& m : rows[i]) {
      Row r;
      for (const auto& [j, pr] : m) r.emplace_back(rank[j], pr);
      std::sort(r.begin(), r.end());
      krows.push_back(std::move(r));
    }
    p.kernel.push_back(std::move(krows));
  }
  return p;
}

std::vector<std::pair<std::int64_t, std::size_t>> untime(const std::vector<ProductState>& run) {
  std::vector<std::pair<std::int64_t, std::size_t>> out;
  for (const auto& st : run) out.emplace_back(st.s, st.q);
  return out;
}

std::vector<std::pair<std::size_t, std::vector<std::int64_t>>> time_projection(const std::vector<ProductState>& run) {
  std::vector<std::pair<std::size_t, std::vector<std::int64_t>>> out;
  for (const auto& st : run) out.emplace_back(st.q, st.v);
  return out;
}

}  // namespace mitlgame
