#include "mitlgame/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mitlgame/error.hpp"

namespace mitlgame {

namespace {

constexpr double kPivotEps = 1e-11;

class Tableau {
 public:
  Tableau(std::size_t m, std::size_t ncols) : m_(m), n_(ncols), a_((m + 1) * (ncols + 1), 0.0), basis_(m, 0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double& obj(std::size_t j) { return at(m_, j); }
  std::size_t& basis(std::size_t i) { return basis_[i]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t r, std::size_t e) {
    const double piv = at(r, e);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= piv;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, e);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, e) = 0.0;
    }
    basis_[r] = e;
  }

  // Bland's rule over columns [0, limit). Returns false when unbounded.
  bool optimize(std::size_t limit) {
    for (std::size_t iter = 0;; ++iter) {
      if (iter > 100000) throw runtime_error("LpFailure", "simplex iteration limit reached");
      std::size_t e = limit;
      for (std::size_t j = 0; j < limit; ++j)
        if (obj(j) > kPivotEps) {
          e = j;
          break;
        }
      if (e == limit) return true;
      std::size_t r = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double aie = at(i, e);
        if (aie <= kPivotEps) continue;
        const double ratio = rhs(i) / aie;
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && r < m_ && basis_[i] < basis_[r])) {
          best = ratio;
          r = i;
        }
      }
      if (r == m_) return false;
      pivot(r, e);
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpResult solve_lp(const std::vector<double>& c, const std::vector<std::vector<double>>& a_ub,
                  const std::vector<double>& b_ub, const std::vector<std::vector<double>>& a_eq,
                  const std::vector<double>& b_eq) {
  const std::size_t n = c.size(), mu = a_ub.size(), me = a_eq.size(), m = mu + me;
  // Rows needing an artificial: equalities and inequalities with negative rhs.
  std::size_t nart = me;
  for (std::size_t i = 0; i < mu; ++i)
    if (b_ub[i] < 0) ++nart;
  const std::size_t art0 = n + mu, ncols = n + mu + nart;
  Tableau t(m, ncols);
  std::size_t next_art = art0;
  for (std::size_t i = 0; i < mu; ++i) {
    const double sign = b_ub[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * a_ub[i][j];
    t.at(i, n + i) = sign;
    t.rhs(i) = sign * b_ub[i];
    if (sign < 0) {
      t.at(i, next_art) = 1.0;
      t.basis(i) = next_art++;
    } else {
      t.basis(i) = n + i;
    }
  }
  for (std::size_t k = 0; k < me; ++k) {
    const std::size_t i = mu + k;
    const double sign = b_eq[k] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * a_eq[k][j];
    t.rhs(i) = sign * b_eq[k];
    t.at(i, next_art) = 1.0;
    t.basis(i) = next_art++;
  }

  LpResult res;
  if (nart > 0) {
    // Phase 1: maximize -sum(artificials).
    for (std::size_t i = 0; i < m; ++i)
      if (t.basis(i) >= art0)
        for (std::size_t j = 0; j <= ncols; ++j)
          if (j < art0 || j == ncols) t.obj(j) += t.at(i, j);
    t.optimize(ncols);
    double scale = 1.0;
    for (double b : b_ub) scale = std::max(scale, std::abs(b));
    for (double b : b_eq) scale = std::max(scale, std::abs(b));
    if (t.rhs(m) > 1e-9 * scale) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis(i) < art0) continue;
      for (std::size_t j = 0; j < art0; ++j)
        if (std::abs(t.at(i, j)) > kPivotEps) {
          t.pivot(i, j);
          break;
        }
    }
  }
  // Phase 2 objective row: c_j minus the basic costs' contribution.
  for (std::size_t j = 0; j <= ncols; ++j) t.obj(j) = j < n ? c[j] : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t b = t.basis(i);
    if (b >= n || c[b] == 0.0) continue;
    const double cb = c[b];
    for (std::size_t j = 0; j <= ncols; ++j) t.obj(j) -= cb * t.at(i, j);
  }
  for (std::size_t j = art0; j < ncols; ++j) t.obj(j) = 0.0;
  if (!t.optimize(art0)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis(i) < n) res.x[t.basis(i)] = std::max(0.0, t.rhs(i));
  res.objective = 0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

namespace {

double min_entry(const Matrix& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : m)
    for (double x : r) lo = std::min(lo, x);
  return lo;
}

void check_shape(const Matrix& m) {
  if (m.empty() || m.front().empty()) throw runtime_error("LpFailure", "empty payoff matrix");
  for (const auto& r : m)
    if (r.size() != m.front().size()) throw runtime_error("LpFailure", "ragged payoff matrix");
}

// Row LP restricted to `allowed` rows; the objective is t or, when focus is
// set, p_focus subject to the mixture guaranteeing at least `target`.
LpResult row_lp(const Matrix& m, const std::vector<std::size_t>& allowed, double shift, std::optional<std::size_t> focus,
                double target) {
  const std::size_t k = allowed.size(), nc = m.front().size();
  std::vector<double> c(k + 1, 0.0);
  std::vector<std::vector<double>> aub;
  std::vector<double> bub;
  for (std::size_t col = 0; col < nc; ++col) {
    std::vector<double> row(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) row[i] = -(m[allowed[i]][col] - shift);
    if (focus) {
      bub.push_back(-(target - shift));
    } else {
      row[k] = 1.0;
      bub.push_back(0.0);
    }
    aub.push_back(std::move(row));
  }
  if (focus) {
    c[*focus] = 1.0;
  } else {
    c[k] = 1.0;
  }
  std::vector<double> ones(k + 1, 1.0);
  ones[k] = 0.0;
  return solve_lp(c, aub, bub, {ones}, {1.0});
}

}  // namespace

MatrixGameSolution solve_matrix_game(const Matrix& m) {
  check_shape(m);
  std::vector<std::size_t> all(m.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const double shift = min_entry(m);
  LpResult r = row_lp(m, all, shift, std::nullopt, 0.0);
  if (r.status != LpStatus::Optimal) throw runtime_error("LpFailure", "matrix game LP not solved to optimality");
  MatrixGameSolution s;
  s.p.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(m.size()));
  double total = 0;
  for (double x : s.p) total += x;
  for (double& x : s.p) x /= total;
  s.value = r.x.back() + shift;
  return s;
}

double matrix_game_value(const Matrix& m) {
  check_shape(m);
  const std::size_t nr = m.size(), nc = m.front().size();
  double maxmin = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < nr; ++r) maxmin = std::max(maxmin, *std::min_element(m[r].begin(), m[r].end()));
  if (nr == 1) return maxmin;
  double minmax = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < nc; ++c) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < nr; ++r) hi = std::max(hi, m[r][c]);
    minmax = std::min(minmax, hi);
  }
  if (nc == 1 || minmax - maxmin <= 1e-15) return maxmin;
  return solve_matrix_game(m).value;
}

double matrix_game_dual_value(const Matrix& m) {
  check_shape(m);
  const std::size_t nr = m.size(), nc = m.front().size();
  const double shift = min_entry(m);
  // maximize -w  s.t.  sum_c (M[r][c]-shift) q_c - w <= 0,  sum q = 1.
  std::vector<double> c(nc + 1, 0.0);
  c[nc] = -1.0;
  std::vector<std::vector<double>> aub;
  std::vector<double> bub;
  for (std::size_t r = 0; r < nr; ++r) {
    std::vector<double> row(nc + 1, 0.0);
    for (std::size_t j = 0; j < nc; ++j) row[j] = m[r][j] - shift;
    row[nc] = -1.0;
    aub.push_back(std::move(row));
    bub.push_back(0.0);
  }
  std::vector<double> ones(nc + 1, 1.0);
  ones[nc] = 0.0;
  LpResult res = solve_lp(c, aub, bub, {ones}, {1.0});
  if (res.status != LpStatus::Optimal) throw runtime_error("LpFailure", "adversary LP not solved to optimality");
  return res.x[nc] + shift;
}

MatrixGameSolution solve_matrix_game_lex(const Matrix& m, double tol) {
  check_shape(m);
  const std::size_t nr = m.size();
  const double value = solve_matrix_game(m).value;
  const double target = value - tol;
  const double shift = std::min(min_entry(m), target);
  auto guarantee = [&](const std::vector<double>& p) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.front().size(); ++c) {
      double v = 0;
      for (std::size_t r = 0; r < nr; ++r) v += p[r] * m[r][c];
      worst = std::min(worst, v);
    }
    return worst;
  };

  std::vector<std::size_t> chosen;
  std::size_t start = 0;
  for (;;) {
    if (!chosen.empty()) {
      LpResult r = row_lp(m, chosen, shift, std::nullopt, 0.0);
      if (r.status == LpStatus::Optimal && r.x.back() + shift >= target) break;
    }
    bool grew = false;
    for (std::size_t r = start; r < nr && !grew; ++r) {
      std::vector<std::size_t> allowed = chosen;
      for (std::size_t j = r; j < nr; ++j) allowed.push_back(j);
      LpResult res = row_lp(m, allowed, shift, chosen.size(), target);
      if (res.status == LpStatus::Optimal && res.x[chosen.size()] > tol) {
        chosen.push_back(r);
        start = r + 1;
        grew = true;
      }
    }
    if (!grew) break;
  }
  MatrixGameSolution out;
  out.value = value;
  out.p.assign(nr, 0.0);
  // Average of per-row witnesses so every chosen row carries positive mass.
  std::size_t used = 0;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    LpResult res = row_lp(m, chosen, shift, k, target);
    if (res.status != LpStatus::Optimal || res.x[k] <= tol) continue;
    for (std::size_t i = 0; i < chosen.size(); ++i) out.p[chosen[i]] += res.x[i];
    ++used;
  }
  if (used == 0) return solve_matrix_game(m);
  double total = 0;
  for (double x : out.p) total += x;
  for (double& x : out.p) x /= total;
  if (guarantee(out.p) < target) return solve_matrix_game(m);
  return out;
}

}  // namespace mitlgame
