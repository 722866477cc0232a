#include "mitlgame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mitlgame/error.hpp"
#include "mitlgame/parallel.hpp"

namespace mitlgame {

namespace {

constexpr double kSlack = 1e-12;
// Matrix-game values carry simplex round-off up to the LP feasibility
// tolerance, so monotonicity and bounds are judged at that scale.
constexpr double kIterateSlack = 1e-9;

std::vector<double> block_values(const Game& z, std::size_t s, const std::vector<double>& q) {
  std::vector<double> out(z.blocks[s].size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k)
    for (const auto& x : z.blocks[s][k]) out[k] += x.p * q[x.to];
  return out;
}

Matrix matrix_over(const Game& z, std::size_t s, const std::vector<double>& bv, const std::vector<std::size_t>& cols) {
  Matrix m(z.rows[s], std::vector<double>(cols.size()));
  for (std::size_t r = 0; r < z.rows[s]; ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) m[r][j] = bv[z.block_of[s][r * z.cols[s] + cols[j]]];
  return m;
}

// Drops weakly dominated rows and columns; the game value is unchanged.
Matrix prune_dominated(const Matrix& m) {
  const std::size_t nr = m.size(), nc = m.front().size();
  std::vector<bool> row_keep(nr, true), col_keep(nc, true);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t o = 0; o < nr && row_keep[r]; ++o) {
      if (o == r || !row_keep[o]) continue;
      bool below = true;
      for (std::size_t c = 0; c < nc && below; ++c) below = m[r][c] <= m[o][c];
      if (below) row_keep[r] = false;
    }
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t o = 0; o < nc && col_keep[c]; ++o) {
      if (o == c || !col_keep[o]) continue;
      bool above = true;
      for (std::size_t r = 0; r < nr && above; ++r) above = !row_keep[r] || m[r][c] >= m[r][o];
      if (above) col_keep[c] = false;
    }
  Matrix out;
  for (std::size_t r = 0; r < nr; ++r) {
    if (!row_keep[r]) continue;
    std::vector<double> row;
    for (std::size_t c = 0; c < nc; ++c)
      if (col_keep[c]) row.push_back(m[r][c]);
    out.push_back(std::move(row));
  }
  return out;
}

double game_value(const Matrix& m) {
  double maxmin = -std::numeric_limits<double>::infinity();
  for (const auto& row : m) maxmin = std::max(maxmin, *std::min_element(row.begin(), row.end()));
  double minmax = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < m.front().size(); ++c) {
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : m) hi = std::max(hi, row[c]);
    minmax = std::min(minmax, hi);
  }
  if (minmax - maxmin <= 1e-15) return maxmin;
  return matrix_game_value(prune_dominated(m));
}

std::vector<std::vector<std::size_t>> all_distinct_columns(const Game& z) {
  std::vector<std::vector<std::size_t>> out(z.size());
  for (std::size_t s = 0; s < z.size(); ++s) out[s] = distinct_columns(z, s);
  return out;
}

std::vector<double> sweep(const Game& z, const std::vector<bool>& target, const std::vector<bool>& reach,
                          const std::vector<std::vector<std::size_t>>& cols, const std::vector<double>& q,
                          unsigned threads) {
  std::vector<double> out(z.size());
  parallel_for(z.size(), threads, [&](std::size_t s) {
    if (target[s]) {
      out[s] = 1.0;
    } else if (!reach[s]) {
      out[s] = 0.0;
    } else {
      out[s] = game_value(matrix_over(z, s, block_values(z, s, q), cols[s]));
    }
  });
  return out;
}

double fixed_value(const Game& z, std::size_t s, const FixedDefender& mu, std::size_t c, const std::vector<double>& bv) {
  const auto& d = mu.dist[s][mu.which[s][c]];
  double v = 0;
  for (std::size_t r = 0; r < z.rows[s]; ++r)
    if (d[r] != 0) v += d[r] * bv[z.block_of[s][r * z.cols[s] + c]];
  return v;
}

std::vector<double> fixed_sweep(const Game& z, const std::vector<bool>& target, const std::vector<bool>& reach,
                                const FixedDefender& mu, const std::optional<ColumnPolicy>& adversary,
                                const std::vector<double>& q) {
  std::vector<double> out(z.size());
  for (std::size_t s = 0; s < z.size(); ++s) {
    if (target[s]) {
      out[s] = 1.0;
      continue;
    }
    if (!reach[s]) {
      out[s] = 0.0;
      continue;
    }
    const auto bv = block_values(z, s, q);
    if (adversary) {
      out[s] = fixed_value(z, s, mu, (*adversary)[s], bv);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < z.cols[s]; ++c) best = std::min(best, fixed_value(z, s, mu, c, bv));
      out[s] = best;
    }
  }
  return out;
}

ActionDistribution sparse(const std::vector<double>& dense) {
  ActionDistribution out;
  double total = 0;
  for (double x : dense) total += x > 1e-12 ? x : 0.0;
  for (std::size_t r = 0; r < dense.size(); ++r)
    if (dense[r] > 1e-12) out.emplace_back(r, dense[r] / total);
  return out;
}

std::vector<double> dense(const ActionDistribution& d, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (const auto& [r, p] : d) {
    if (r >= n) throw runtime_error("IncompletePolicy", "controller row names an action outside the state");
    out[r] += p;
  }
  return out;
}

bool same_row(const ActionDistribution& a, const ActionDistribution& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].first != b[i].first || std::abs(a[i].second - b[i].second) > 1e-9) return false;
  return true;
}

}  // namespace

std::vector<bool> reachability_targets(const GamecSet& gamecs, std::size_t n) { return gamecs.in_union(n); }

std::vector<bool> reachability_targets(const Game& z, TargetMode mode) {
  if (mode == TargetMode::Accepting) return z.accepting;
  return compute_gamecs(z).in_union(z.size());
}

std::vector<bool> can_reach(const Game& z, const std::vector<bool>& target) {
  std::vector<std::vector<std::uint32_t>> pred(z.size());
  for (std::size_t s = 0; s < z.size(); ++s) {
    std::vector<std::uint32_t> succ;
    for (const auto& b : z.blocks[s])
      for (const auto& x : b)
        if (x.p > 0) succ.push_back(x.to);
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    for (auto t : succ) pred[t].push_back(static_cast<std::uint32_t>(s));
  }
  std::vector<bool> seen(target);
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < z.size(); ++s)
    if (seen[s]) queue.push_back(s);
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (auto u : pred[queue[i]])
      if (!seen[u]) {
        seen[u] = true;
        queue.push_back(u);
      }
  return seen;
}

Matrix payoff_matrix(const Game& z, std::size_t s, const std::vector<double>& q) {
  std::vector<std::size_t> all(z.cols[s]);
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  return matrix_over(z, s, block_values(z, s, q), all);
}

std::vector<std::size_t> distinct_columns(const Game& z, std::size_t s) {
  std::map<std::vector<std::uint32_t>, std::size_t> seen;
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < z.cols[s]; ++c) {
    std::vector<std::uint32_t> sig(z.rows[s]);
    for (std::size_t r = 0; r < z.rows[s]; ++r) sig[r] = z.block_of[s][r * z.cols[s] + c];
    if (seen.emplace(std::move(sig), c).second) out.push_back(c);
  }
  return out;
}

std::vector<double> bellman_update(const Game& z, const std::vector<bool>& target, const std::vector<double>& q,
                                   unsigned threads) {
  return sweep(z, target, can_reach(z, target), all_distinct_columns(z), q, threads);
}

ViResult value_iteration(const Game& z, const ViOptions& opt) {
  return value_iteration(z, reachability_targets(z, opt.target), opt);
}

ViResult value_iteration(const Game& z, const std::vector<bool>& target, const ViOptions& opt) {
  if (!(opt.epsilon > 0)) throw validation_error("BadEpsilon", "epsilon must be positive");
  const std::size_t n = z.size();
  if (opt.initial && opt.initial->size() != n) throw validation_error("ShapeMismatch", "initial vector size differs");
  ViResult res;
  res.target = target;
  const auto reach = can_reach(z, target);
  const auto cols = all_distinct_columns(z);
  std::vector<double> q(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (target[s])
      q[s] = 1.0;
    else if (reach[s] && opt.initial)
      q[s] = std::clamp((*opt.initial)[s], 0.0, 1.0);
  }
  const double cap_d = 10.0 * static_cast<double>(std::max<std::size_t>(n, 1)) / opt.epsilon;
  const std::size_t cap = opt.max_iterations ? opt.max_iterations
                                             : static_cast<std::size_t>(std::min(cap_d, 1e18));
  for (;;) {
    auto next = sweep(z, target, reach, cols, q, opt.threads);
    double delta = 0;
    for (std::size_t s = 0; s < n; ++s) {
      delta = std::max(delta, std::abs(next[s] - q[s]));
      if (next[s] < q[s] - kIterateSlack) res.monotone = false;
      if (next[s] < -kIterateSlack || next[s] > 1 + kIterateSlack) res.bounded = false;
    }
    q = std::move(next);
    res.trace.push_back(delta);
    ++res.iterations;
    if (delta <= opt.epsilon) break;
    if (res.iterations >= cap)
      throw runtime_error("IterationCap", "value iteration did not converge within " + std::to_string(cap) +
                                              " sweeps; last change " + std::to_string(delta));
  }
  res.q = std::move(q);
  return res;
}

FixedDefender fixed_rows(const Game& z, const std::vector<std::vector<double>>& rows) {
  if (rows.size() != z.size()) throw validation_error("ShapeMismatch", "one row distribution per state required");
  FixedDefender mu;
  for (std::size_t s = 0; s < z.size(); ++s) {
    if (rows[s].size() != z.rows[s]) throw validation_error("ShapeMismatch", "row distribution length differs");
    mu.dist.push_back({rows[s]});
    mu.which.emplace_back(z.cols[s], 0);
  }
  return mu;
}

std::vector<double> apply_fixed_policy(const Game& z, const std::vector<bool>& target, const FixedDefender& mu,
                                       const std::optional<ColumnPolicy>& adversary, const std::vector<double>& q) {
  return fixed_sweep(z, target, can_reach(z, target), mu, adversary, q);
}

std::vector<double> fixed_policy_values(const Game& z, const std::vector<bool>& target, const FixedDefender& mu,
                                        const std::optional<ColumnPolicy>& adversary, double tol,
                                        std::size_t max_iterations) {
  const auto reach = can_reach(z, target);
  std::vector<double> q(z.size(), 0.0);
  for (std::size_t s = 0; s < z.size(); ++s)
    if (target[s]) q[s] = 1.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    auto next = fixed_sweep(z, target, reach, mu, adversary, q);
    double delta = 0;
    for (std::size_t s = 0; s < z.size(); ++s) delta = std::max(delta, std::abs(next[s] - q[s]));
    q = std::move(next);
    if (delta <= tol) return q;
  }
  throw runtime_error("IterationCap", "fixed-policy evaluation did not converge");
}

BestResponse best_response(const Game& z, const std::vector<bool>& target, const FixedDefender& mu) {
  const auto values = fixed_policy_values(z, target, mu, std::nullopt);
  BestResponse br;
  br.columns.resize(z.size(), 0);
  for (std::size_t s = 0; s < z.size(); ++s) {
    const auto bv = block_values(z, s, values);
    std::vector<double> per(z.cols[s]);
    for (std::size_t c = 0; c < z.cols[s]; ++c) per[c] = fixed_value(z, s, mu, c, bv);
    const double lo = *std::min_element(per.begin(), per.end());
    for (std::size_t c = 0; c < per.size(); ++c)
      if (per[c] <= lo + kSlack) {
        br.columns[s] = c;
        break;
      }
  }
  br.values = fixed_policy_values(z, target, mu, br.columns);
  return br;
}

std::vector<std::vector<double>> optimal_rows(const Game& z, const std::vector<bool>& target,
                                              const GamecSet& gamecs, const std::vector<double>& q,
                                              unsigned threads) {
  std::vector<const SubGame*> owner(z.size(), nullptr);
  std::vector<std::size_t> slot(z.size(), 0);
  for (const auto& comp : gamecs.components)
    for (std::size_t i = 0; i < comp.states.size(); ++i) {
      owner[comp.states[i]] = &comp;
      slot[comp.states[i]] = i;
    }
  std::vector<std::vector<double>> out(z.size());
  parallel_for(z.size(), threads, [&](std::size_t s) {
    std::vector<double> row(z.rows[s], 0.0);
    if (target[s] && owner[s]) {
      const auto& keep = owner[s]->rows[slot[s]];
      for (auto r : keep) row[r] = 1.0 / static_cast<double>(keep.size());
    } else {
      const auto cols = distinct_columns(z, s);
      row = solve_matrix_game_lex(matrix_over(z, s, block_values(z, s, q), cols)).p;
    }
    out[s] = std::move(row);
  });
  return out;
}

Extraction extract_policy(const GlobalGame& gg, const ProductGame& p, const TimedBuchiAutomaton& a,
                          const std::vector<std::vector<double>>& rows) {
  Extraction ex;
  ex.rows = rows;
  auto& fsc = ex.fsc;
  fsc.clocks = a.clocks;
  fsc.lambda_cap = gg.lambda_cap;
  fsc.threshold = gg.options.detect_threshold;
  fsc.duration_estimate = gg.duration_estimate;
  std::map<FiniteStateController::Key0, bool> exact;
  for (std::size_t i = 0; i < gg.states.size(); ++i) {
    const GlobalState& st = gg.states[i];
    const ProductState& ps = p.states[st.p];
    if (ps.violation()) continue;
    const auto s = static_cast<std::size_t>(ps.s);
    const ActionDistribution row = sparse(rows[i]);
    if (st.detected) {
      auto [it, fresh] = fsc.mu1.emplace(FiniteStateController::Key1{st.lambda, s, ps.q}, row);
      if (!fresh && !same_row(it->second, row)) ++ex.conflicts;
      continue;
    }
    for (const auto& col : gg.columns[i]) {
      if (col.detect) continue;
      FiniteStateController::Key0 key{st.lambda, s, ps.q, col.observed};
      const bool is_exact = col.observed == ps.v;
      auto it = fsc.mu0.find(key);
      if (it == fsc.mu0.end()) {
        fsc.mu0.emplace(key, row);
        exact[key] = is_exact;
      } else if (!same_row(it->second, row)) {
        ++ex.conflicts;
        if (is_exact && !exact[key]) {
          it->second = row;
          exact[key] = true;
        }
      }
    }
  }
  return ex;
}

FixedDefender controller_rows(const GlobalGame& gg, const ProductGame& p, const FiniteStateController& fsc) {
  const Game& z = gg.game;
  FixedDefender mu;
  mu.dist.resize(z.size());
  mu.which.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const GlobalState& st = gg.states[i];
    const ProductState& ps = p.states[st.p];
    const std::size_t nr = z.rows[i];
    mu.which[i].assign(z.cols[i], 0);
    if (ps.violation()) {
      std::vector<double> row(nr, 0.0);
      row[0] = 1.0;
      mu.dist[i].push_back(std::move(row));
      continue;
    }
    const auto s = static_cast<std::size_t>(ps.s);
    if (st.detected) {
      mu.dist[i].push_back(dense(fsc.act(st.lambda, true, s, ps.q, ps.v), nr));
      continue;
    }
    // A detecting column redirects whatever the row, so index 0 is a placeholder.
    std::vector<double> placeholder(nr, 0.0);
    placeholder[0] = 1.0;
    mu.dist[i].push_back(std::move(placeholder));
    std::map<Valuation, std::uint32_t> seen;
    for (std::size_t c = 0; c < z.cols[i]; ++c) {
      const auto& col = gg.columns[i][c];
      if (col.detect) continue;
      auto it = seen.find(col.observed);
      if (it == seen.end()) {
        mu.dist[i].push_back(dense(fsc.act(st.lambda, false, s, ps.q, col.observed), nr));
        it = seen.emplace(col.observed, static_cast<std::uint32_t>(mu.dist[i].size() - 1)).first;
      }
      mu.which[i][c] = it->second;
    }
  }
  return mu;
}

FiniteStateController stationary_controller(const GlobalGame& gg, const ProductGame& p, const TimedBuchiAutomaton& a,
                                            const std::vector<std::vector<double>>& dsg_rows) {
  FiniteStateController fsc;
  fsc.clocks = a.clocks;
  fsc.lambda_cap = gg.lambda_cap;
  fsc.threshold = gg.options.detect_threshold;
  fsc.duration_estimate = gg.duration_estimate;
  for (std::size_t i = 0; i < gg.states.size(); ++i) {
    const GlobalState& st = gg.states[i];
    const ProductState& ps = p.states[st.p];
    if (ps.violation()) continue;
    const auto s = static_cast<std::size_t>(ps.s);
    if (s >= dsg_rows.size()) throw validation_error("ShapeMismatch", "missing row for DSG state");
    const ActionDistribution row = sparse(dsg_rows[s]);
    if (st.detected) {
      fsc.mu1[{st.lambda, s, ps.q}] = row;
      continue;
    }
    for (const auto& col : gg.columns[i])
      if (!col.detect) fsc.mu0[{st.lambda, s, ps.q, col.observed}] = row;
  }
  return fsc;
}

GlobalGame restrict_to_passive(const GlobalGame& gg, const ProductGame& p, std::size_t passive_action) {
  GlobalGame out = gg;
  Game& z = out.game;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const ProductState& ps = p.states[gg.states[i].p];
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < gg.game.cols[i]; ++c) {
      const auto& col = gg.columns[i][c];
      if (ps.violation() || (col.ua == passive_action && col.observed == ps.v)) keep.push_back(c);
    }
    if (keep.empty()) throw validation_error("NoPassiveColumn", "state " + z.names[i] + " has no passive column");
    std::vector<std::uint32_t> block_of;
    std::vector<AdversaryColumn> columns;
    for (std::size_t r = 0; r < z.rows[i]; ++r)
      for (auto c : keep) block_of.push_back(gg.game.block_of[i][r * gg.game.cols[i] + c]);
    for (auto c : keep) columns.push_back(gg.columns[i][c]);
    z.block_of[i] = std::move(block_of);
    z.cols[i] = keep.size();
    out.columns[i] = std::move(columns);
  }
  return out;
}

}  // namespace mitlgame
