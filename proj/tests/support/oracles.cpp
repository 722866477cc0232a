#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace testsupport {

using namespace mitlgame;

namespace {

// Rows of s all of whose blocks stay inside `member`.
std::vector<std::size_t> staying_rows(const Game& z, std::size_t s, const std::vector<bool>& member) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < z.rows[s]; ++r) {
    bool ok = true;
    for (std::size_t c = 0; c < z.cols[s] && ok; ++c)
      for (const auto& e : z.block(s, r, c))
        if (e.p > 0 && !member[e.to]) ok = false;
    if (ok) out.push_back(r);
  }
  return out;
}

std::optional<SubGame> end_component(const Game& z, std::uint32_t mask) {
  const std::size_t n = z.size();
  std::vector<bool> member(n);
  for (std::size_t s = 0; s < n; ++s) member[s] = mask >> s & 1;
  SubGame sg;
  for (std::size_t s = 0; s < n; ++s) {
    if (!member[s]) continue;
    auto rows = staying_rows(z, s, member);
    if (rows.empty()) return std::nullopt;
    sg.states.push_back(s);
    sg.rows.push_back(std::move(rows));
  }
  // Strong connectivity: reachability matrix restricted to the staying rows.
  const std::size_t k = sg.states.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = sg.states[i];
    reach[s][s] = true;
    for (auto r : sg.rows[i])
      for (std::size_t c = 0; c < z.cols[s]; ++c)
        for (const auto& e : z.block(s, r, c))
          if (e.p > 0) reach[s][e.to] = true;
  }
  for (auto m : sg.states)
    for (auto i : sg.states)
      for (auto j : sg.states)
        if (reach[i][m] && reach[m][j]) reach[i][j] = true;
  for (auto i : sg.states)
    for (auto j : sg.states)
      if (!reach[i][j]) return std::nullopt;
  return sg;
}

}  // namespace

GamecSet brute_force_gamecs(const Game& z) {
  const std::size_t n = z.size();
  if (n > 16) throw std::invalid_argument("brute force limited to 16 states");
  std::vector<std::pair<std::uint32_t, SubGame>> ecs;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
    if (auto sg = end_component(z, mask)) ecs.emplace_back(mask, std::move(*sg));
  GamecSet out;
  for (const auto& [mask, sg] : ecs) {
    bool maximal = true;
    for (const auto& [other, _] : ecs)
      if (other != mask && (other & mask) == mask) maximal = false;
    bool accepting = false;
    for (auto s : sg.states) accepting = accepting || z.accepting[s];
    if (maximal && accepting) out.components.push_back(sg);
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const SubGame& a, const SubGame& b) { return a.states.front() < b.states.front(); });
  return out;
}

std::vector<std::vector<bool>> transitive_closure(const Game& z) {
  const std::size_t n = z.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    reach[s][s] = true;
    for (const auto& b : z.blocks[s])
      for (const auto& e : b)
        if (e.p > 0) reach[s][e.to] = true;
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][m])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[m][j]) reach[i][j] = true;
  return reach;
}

std::vector<double> reachability_by_linear_solve(const Game& z, const std::vector<bool>& target,
                                                 const std::vector<std::vector<double>>& rows,
                                                 const std::vector<std::size_t>& columns) {
  const std::size_t n = z.size();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t r = 0; r < z.rows[s]; ++r)
      if (rows[s][r] > 0)
        for (const auto& e : z.block(s, r, columns[s])) p[s][e.to] += rows[s][r] * e.p;

  // States with a positive-probability path to the target.
  std::vector<bool> good = target;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s)
      if (!good[s])
        for (std::size_t t = 0; t < n; ++t)
          if (p[s][t] > 0 && good[t]) {
            good[s] = true;
            changed = true;
            break;
          }
  }
  std::vector<std::size_t> unknown;
  std::vector<std::size_t> pos(n, n);
  for (std::size_t s = 0; s < n; ++s)
    if (good[s] && !target[s]) {
      pos[s] = unknown.size();
      unknown.push_back(s);
    }
  const std::size_t k = unknown.size();
  // (I - P_UU) x = P_UT 1
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = unknown[i];
    a[i][i] = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (target[t]) a[i][k] += p[s][t];
      else if (pos[t] < n) a[i][pos[t]] -= p[s][t];
    }
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    if (std::abs(a[col][col]) < 1e-14) throw std::runtime_error("singular reachability system");
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0) continue;
      for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    if (target[s]) x[s] = 1.0;
  for (std::size_t i = 0; i < k; ++i) x[unknown[i]] = a[i][k] / a[i][i];
  return x;
}

std::optional<PureBounds> pure_stationary_bounds(const Game& z, const std::vector<bool>& target,
                                                 std::size_t limit) {
  const std::size_t n = z.size();
  std::size_t ns = 1, nt = 1;
  for (std::size_t s = 0; s < n; ++s) {
    ns *= z.rows[s];
    nt *= z.cols[s];
    if (ns * nt > limit) return std::nullopt;
  }
  auto decode = [&](std::size_t idx, const std::vector<std::size_t>& base) {
    std::vector<std::size_t> d(n);
    for (std::size_t s = 0; s < n; ++s) {
      d[s] = idx % base[s];
      idx /= base[s];
    }
    return d;
  };
  std::vector<std::vector<std::vector<double>>> v(ns, std::vector<std::vector<double>>(nt));
  for (std::size_t i = 0; i < ns; ++i) {
    const auto rsel = decode(i, z.rows);
    std::vector<std::vector<double>> rows(n);
    for (std::size_t s = 0; s < n; ++s) {
      rows[s].assign(z.rows[s], 0.0);
      rows[s][rsel[s]] = 1.0;
    }
    for (std::size_t j = 0; j < nt; ++j) v[i][j] = reachability_by_linear_solve(z, target, rows, decode(j, z.cols));
  }
  PureBounds b;
  b.max_min.assign(n, 0.0);
  b.min_max.assign(n, 1.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < ns; ++i) {
      double m = 1.0;
      for (std::size_t j = 0; j < nt; ++j) m = std::min(m, v[i][j][s]);
      b.max_min[s] = std::max(b.max_min[s], m);
    }
    for (std::size_t j = 0; j < nt; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < ns; ++i) m = std::max(m, v[i][j][s]);
      b.min_max[s] = std::min(b.min_max[s], m);
    }
  }
  return b;
}

}  // namespace testsupport
