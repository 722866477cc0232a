#include "mitlgame/gdsg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mitlgame/error.hpp"

namespace mitlgame {

std::vector<std::pair<std::size_t, Valuation>> enumerate_adversary_choices(const Valuation& v, std::int64_t cap,
                                                                           std::int64_t kappa_max, std::size_t na) {
  if (kappa_max < 0) throw validation_error("BadKappa", "kappa_max must be non-negative");
  std::vector<Valuation> shifted;
  std::set<Valuation> seen;
  for (std::int64_t mag = 0; mag <= kappa_max; ++mag) {
    std::vector<Valuation> ring;
    for (std::int64_t k : {-mag, mag}) {
      Valuation w = v;
      for (auto& x : w) x = std::clamp<std::int64_t>(x + k, 0, cap);
      if (seen.insert(w).second) ring.push_back(std::move(w));
      if (mag == 0) break;
    }
    std::sort(ring.begin(), ring.end());
    for (auto& w : ring) shifted.push_back(std::move(w));
  }
  std::vector<std::pair<std::size_t, Valuation>> out;
  for (std::size_t a = 0; a < na; ++a)
    for (const auto& w : shifted) out.emplace_back(a, w);
  return out;
}

std::int64_t expected_duration(const Dsg& g, std::size_t s, std::size_t c, std::size_t s2) {
  double mean = 0;
  std::map<std::int64_t, double> dist;
  std::size_t count = 0;
  for (std::size_t a = 0; a < g.na(s); ++a)
    for (const auto& o : g.row(s, c, a)) {
      if (o.to != s2 || o.p <= 0) continue;
      ++count;
      for (const auto& [d, p] : o.durations) {
        mean += static_cast<double>(d) * p;
        dist[d] += p;
      }
    }
  if (count == 0) throw runtime_error("UnreachableSuccessor", "no adversary action reaches the successor");
  mean /= static_cast<double>(count);
  const double fl = std::floor(mean);
  if (std::abs(mean - fl - 0.5) > 1e-12) return std::max<std::int64_t>(1, std::llround(mean));
  std::int64_t mode = dist.begin()->first;
  double best = -1;
  for (const auto& [d, p] : dist)
    if (p > best + 1e-12) {
      best = p;
      mode = d;
    }
  const auto lo = static_cast<std::int64_t>(fl);
  return std::max<std::int64_t>(1, std::abs(mode - lo) <= std::abs(mode - (lo + 1)) ? lo : lo + 1);
}

GlobalGame build_global(const ProductGame& p, const Dsg& g, const TimedBuchiAutomaton& a, const GdsgOptions& opt) {
  if (opt.fsc_size < 0) throw validation_error("BadFscSize", "fsc_size must be non-negative");
  if (opt.detect_threshold && *opt.detect_threshold < 0)
    throw validation_error("BadThreshold", "detection threshold must be non-negative");
  const auto map = alphabet_map(g, a);
  GlobalGame out;
  out.options = opt;
  out.valuation_cap = p.cap;
  out.lambda_cap = opt.fsc_size == 0 ? p.cap : std::min<std::int64_t>(p.cap, opt.fsc_size - 1);
  const std::size_t nclk = a.clocks.size();

  std::map<GlobalState, std::size_t> index;
  std::vector<GlobalState> order;
  auto intern = [&](GlobalState st) {
    auto [it, fresh] = index.emplace(st, order.size());
    if (fresh) order.push_back(std::move(st));
    return it->second;
  };
  auto estimate = [&](std::size_t s, std::size_t c, std::size_t s2) {
    auto key = std::make_tuple(s, c, s2);
    auto it = out.duration_estimate.find(key);
    if (it != out.duration_estimate.end()) return it->second;
    std::int64_t d = expected_duration(g, s, c, s2);
    out.duration_estimate.emplace(key, d);
    return d;
  };

  struct Pending {
    std::size_t rows = 1, cols = 1;
    std::vector<Block> blocks;
    std::vector<std::uint32_t> block_of;
    std::vector<AdversaryColumn> columns;
  };
  std::vector<Pending> pending;

  intern(GlobalState{p.initial, Valuation(nclk, 0), false});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const GlobalState st = order[i];
    const ProductState& ps = p.states[st.p];
    Pending pend;
    if (ps.violation()) {
      pend.blocks = {{Succ{static_cast<std::uint32_t>(i), 1.0}}};
      pend.block_of = {0};
      pend.columns = {AdversaryColumn{0, {}, false}};
      pending.push_back(std::move(pend));
      continue;
    }
    const auto s = static_cast<std::size_t>(ps.s);
    const std::size_t nc = p.nc[st.p], na = p.na[st.p];
    if (!st.detected) {
      for (auto& [ua, seen] : enumerate_adversary_choices(ps.v, p.cap, opt.kappa_max, na)) {
        bool trip = detect(st.lambda, seen, opt.detect_threshold) == Hypothesis::H1;
        pend.columns.push_back({ua, seen, trip});
      }
    } else {
      for (std::size_t ua = 0; ua < na; ++ua) pend.columns.push_back({ua, ps.v, false});
    }
    // Blocks per (row, uA), identical distributions stored once, plus the
    // detection redirect.
    std::map<Block, std::uint32_t> unique;
    std::vector<std::uint32_t> block_at(nc * na);
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t ua = 0; ua < na; ++ua) {
        std::map<std::size_t, double> acc;
        for (const auto& [p2, pr] : p.row(st.p, c, ua)) {
          const ProductState& next = p.states[p2];
          if (next.violation()) {
            acc[intern(GlobalState{p2, Valuation(nclk, 0), false})] += pr;
            continue;
          }
          const auto s2 = static_cast<std::size_t>(next.s);
          const std::int64_t d = estimate(s, c, s2);
          auto steps = step_quantized(ps.q, st.lambda, automaton_letter(g.labels[s2], map), d, a);
          std::vector<std::size_t> resets;
          if (!steps.empty()) resets = a.edges[steps.front().edge].resets;
          Valuation lam = advance_estimate(st.lambda, d, resets, out.lambda_cap);
          acc[intern(GlobalState{p2, std::move(lam), st.detected})] += pr;
        }
        Block b;
        for (const auto& [to, pr] : acc) b.push_back(Succ{static_cast<std::uint32_t>(to), pr});
        auto [it, fresh] = unique.emplace(b, static_cast<std::uint32_t>(pend.blocks.size()));
        if (fresh) pend.blocks.push_back(std::move(b));
        block_at[c * na + ua] = it->second;
      }
    bool any_detect = std::any_of(pend.columns.begin(), pend.columns.end(), [](const auto& x) { return x.detect; });
    std::uint32_t redirect = 0;
    if (any_detect) {
      redirect = static_cast<std::uint32_t>(pend.blocks.size());
      pend.blocks.push_back({Succ{static_cast<std::uint32_t>(intern(GlobalState{st.p, st.lambda, true})), 1.0}});
    }
    pend.rows = nc;
    pend.cols = pend.columns.size();
    for (std::size_t c = 0; c < nc; ++c)
      for (const auto& col : pend.columns)
        pend.block_of.push_back(col.detect ? redirect : block_at[c * na + col.ua]);
    pending.push_back(std::move(pend));
  }

  std::vector<std::size_t> perm(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return order[x] < order[y]; });
  std::vector<std::uint32_t> rank(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) rank[perm[i]] = static_cast<std::uint32_t>(i);

  Game& z = out.game;
  z.initial = rank[0];
  for (std::size_t i : perm) {
    Pending& pend = pending[i];
    for (auto& b : pend.blocks) {
      for (auto& x : b) x.to = rank[x.to];
      std::sort(b.begin(), b.end(), [](const Succ& l, const Succ& r) { return l.to < r.to; });
    }
    const GlobalState& st = order[i];
    std::string name = "(" + std::to_string(st.p) + ",[";
    for (std::size_t k = 0; k < st.lambda.size(); ++k) name += (k ? "," : "") + std::to_string(st.lambda[k]);
    name += "]," + std::string(st.detected ? "1" : "0") + ")";
    z.accepting.push_back(p.accepting[st.p]);
    z.rows.push_back(pend.rows);
    z.cols.push_back(pend.cols);
    z.blocks.push_back(std::move(pend.blocks));
    z.block_of.push_back(std::move(pend.block_of));
    z.names.push_back(std::move(name));
    out.states.push_back(st);
    out.columns.push_back(std::move(pend.columns));
  }
  return out;
}

}  // namespace mitlgame
