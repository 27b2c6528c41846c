#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridmech::solver {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown on malformed inputs (bad bounds, unknown variables, non-finite data).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

enum class Status {
  Optimal,
  Infeasible,
  Unbounded,
  IterationLimit,
  NodeLimit,
};

const char* status_name(Status s);

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Options {
  int max_iterations = 500000;  // simplex pivots per LP solve
  long max_nodes = 5000000;     // branch-and-bound nodes
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;      // reduced-cost tolerance
  double mip_abs_gap = 1e-6;  // scaled by (1 + |incumbent|)
  double int_tol = 1e-6;
  double comp_tol = 1e-7;  // complementarity residual accepted in incumbents
  bool bigm_complementarities = false;  // encode pairs with binaries instead of branching
  double cutoff = kInf;  // known feasible objective value, used to prune
};

/// Affine expression over LP variables.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(std::initializer_list<std::pair<int, double>> t, double c = 0.0)
      : terms(t), constant(c) {}
  void add(int var, double coeff) {
    if (coeff != 0.0) terms.emplace_back(var, coeff);
  }
  double value(const std::vector<double>& x) const;
};

struct Constraint {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double cost = 0.0;
};

class LinearProgram {
 public:
  int add_variable(std::string name, double lb, double ub, double cost = 0.0);
  int add_constraint(std::string name, std::vector<std::pair<int, double>> terms,
                     Sense sense, double rhs);
  void set_cost(int var, double cost);
  void add_cost(int var, double cost) { var_at(var).cost += cost; }
  void set_bounds(int var, double lb, double ub);
  void set_maximize(bool maximize) { maximize_ = maximize; }

  bool maximize() const { return maximize_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(cons_.size()); }
  const Variable& variable(int i) const { return vars_.at(i); }
  const Constraint& constraint(int i) const { return cons_.at(i); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  int variable_index(const std::string& name) const;  // -1 if absent

  /// Checks the declared invariants; throws SolverError on violation.
  void validate() const;

 private:
  Variable& var_at(int i);
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  bool maximize_ = false;
};

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;     // per variable
  std::vector<double> dual;  // per constraint, d(objective)/d(rhs)
  std::vector<double> reduced_cost;  // per variable, cost - dual'column
  // MIP statistics
  double bound = -kInf;
  double gap = 0.0;
  long nodes = 0;

  bool optimal() const { return status == Status::Optimal; }
  double value(const LinExpr& e) const { return e.value(x); }
};

/// Primal simplex on bounded variables, Bland's rule. Deterministic.
Solution solve_lp(const LinearProgram& lp, const Options& opts = {});

}  // namespace gridmech::solver
