#pragma once

#include <vector>

namespace mitlgame {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// maximize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
// Dense two-phase tableau simplex with Bland's rule, so it cannot cycle.
LpResult solve_lp(const std::vector<double>& c, const std::vector<std::vector<double>>& a_ub,
                  const std::vector<double>& b_ub, const std::vector<std::vector<double>>& a_eq,
                  const std::vector<double>& b_eq);

using Matrix = std::vector<std::vector<double>>;  // M[row][col]

struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> p;  // row mixture
};

// max_p min_c sum_r p_r M[r][c] by LP. Throws Error(Runtime, "LpFailure") if
// the LP is not solved to optimality.
MatrixGameSolution solve_matrix_game(const Matrix& m);

// Value only; uses pure saddle points and single row/column shortcuts first.
double matrix_game_value(const Matrix& m);

// min_q max_r sum_c M[r][c] q_c from the adversary's LP.
double matrix_game_dual_value(const Matrix& m);

// Optimal row mixture whose support is chosen greedily in lexicographic
// order: each next support row is the smallest index that some optimal
// mixture (restricted to the rows chosen so far and higher indices) uses.
MatrixGameSolution solve_matrix_game_lex(const Matrix& m, double tol = 1e-9);

}  // namespace mitlgame
