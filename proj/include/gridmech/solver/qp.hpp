#pragma once

#include "gridmech/solver/linear_program.hpp"

namespace gridmech::solver {

/// Convex quadratic program: the LP part supplies variables, bounds, linear
/// costs and constraints; the quadratic objective is a weighted sum of
/// squared affine forms, positive semidefinite by construction.
class QuadraticProgram {
 public:
  LinearProgram lp;

  /// Adds weight * (expr)^2 to the objective; weight must be positive.
  void add_squared_term(LinExpr expr, double weight = 1.0);

  const std::vector<std::pair<LinExpr, double>>& squared_terms() const {
    return terms_;
  }

 private:
  std::vector<std::pair<LinExpr, double>> terms_;
};

/// Dense primal active-set method. Feasible start from a phase-1 simplex
/// solve; KKT residual of the returned point is at most 1e-7.
Solution solve_qp(const QuadraticProgram& qp, const Options& opts = {});

}  // namespace gridmech::solver
