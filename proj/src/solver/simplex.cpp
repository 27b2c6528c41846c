#include <algorithm>
#include <cmath>
#include <map>

#include "gridmech/solver/linear_program.hpp"

namespace gridmech::solver {

const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
    case Status::NodeLimit: return "node_limit";
  }
  return "unknown";
}

double LinExpr::value(const std::vector<double>& x) const {
  double v = constant;
  for (const auto& [var, coeff] : terms) v += coeff * x.at(var);
  return v;
}

int LinearProgram::add_variable(std::string name, double lb, double ub, double cost) {
  if (std::isnan(lb) || std::isnan(ub) || !std::isfinite(cost))
    throw SolverError("variable '" + name + "': non-finite data");
  if (lb > ub)
    throw SolverError("variable '" + name + "': lower bound exceeds upper bound");
  vars_.push_back({std::move(name), lb, ub, cost});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_constraint(std::string name,
                                  std::vector<std::pair<int, double>> terms,
                                  Sense sense, double rhs) {
  if (!std::isfinite(rhs)) throw SolverError("constraint '" + name + "': non-finite rhs");
  for (const auto& [var, coeff] : terms) {
    if (var < 0 || var >= num_variables())
      throw SolverError("constraint '" + name + "': unknown variable index");
    if (!std::isfinite(coeff))
      throw SolverError("constraint '" + name + "': non-finite coefficient");
  }
  cons_.push_back({std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(cons_.size()) - 1;
}

void LinearProgram::set_cost(int var, double cost) { var_at(var).cost = cost; }

void LinearProgram::set_bounds(int var, double lb, double ub) {
  if (lb > ub) throw SolverError("set_bounds: lower bound exceeds upper bound");
  var_at(var).lb = lb;
  var_at(var).ub = ub;
}

Variable& LinearProgram::var_at(int i) {
  if (i < 0 || i >= num_variables()) throw SolverError("bad variable index");
  return vars_[i];
}

int LinearProgram::variable_index(const std::string& name) const {
  for (int i = 0; i < num_variables(); ++i)
    if (vars_[i].name == name) return i;
  return -1;
}

void LinearProgram::validate() const {
  for (const auto& v : vars_)
    if (v.lb > v.ub) throw SolverError("variable '" + v.name + "': empty bound interval");
  for (const auto& c : cons_) {
    if (!std::isfinite(c.rhs)) throw SolverError("constraint '" + c.name + "': non-finite rhs");
    for (const auto& [var, coeff] : c.terms)
      if (var < 0 || var >= num_variables())
        throw SolverError("constraint '" + c.name + "': unknown variable index");
  }
}

namespace {

constexpr double kPivotTol = 1e-9;

// Bounded-variable primal simplex on a dense tableau. Internal columns all
// have lower bound 0; original variables are shifted, flipped, or split so
// that this holds. Every row carries an identity-origin column (slack or
// artificial), which yields B^-1 and hence duals at termination.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const Options& opts) : lp_(lp), opts_(opts) { build(); }

  Solution run() {
    Solution sol;
    // Phase 1: minimize sum of artificials.
    if (!artificials_.empty()) {
      std::vector<double> phase1(cols(), 0.0);
      for (int j : artificials_) phase1[j] = 1.0;
      Status st = iterate(phase1);
      if (st == Status::IterationLimit) {
        sol.status = st;
        return sol;
      }
      double infeas = 0.0;
      for (int j : artificials_) infeas += value_of(j);
      if (infeas > opts_.feas_tol * (1.0 + bscale_)) {
        sol.status = Status::Infeasible;
        return sol;
      }
      for (int j : artificials_) upper_[j] = 0.0;  // lock artificials out
      pivot_out_artificials();
    }
    Status st = iterate(cost_);
    sol.status = st;
    if (st != Status::Optimal) return sol;
    extract(sol);
    return sol;
  }

 private:
  int rows() const { return static_cast<int>(rhs_.size()); }
  int cols() const { return static_cast<int>(upper_.size()); }

  void build() {
    lp_.validate();
    const int n = lp_.num_variables();
    col_of_var_.assign(n, {-1, -1});
    shift_.assign(n, 0.0);
    flip_.assign(n, false);

    // Structural columns.
    for (int i = 0; i < n; ++i) {
      const auto& v = lp_.variable(i);
      double span = v.ub - v.lb;
      if (v.lb == -kInf && v.ub == kInf) {
        col_of_var_[i] = {new_col(kInf), new_col(kInf)};  // x = pos - neg
      } else if (v.lb != -kInf) {
        shift_[i] = v.lb;
        col_of_var_[i].first = new_col(span);
      } else {  // only upper bound finite: x = ub - col
        shift_[i] = v.ub;
        flip_[i] = true;
        col_of_var_[i].first = new_col(kInf);
      }
    }

    // Objective on internal columns (minimization).
    cost_.assign(cols(), 0.0);
    obj_sign_ = lp_.maximize() ? -1.0 : 1.0;
    obj_const_ = 0.0;
    for (int i = 0; i < n; ++i) {
      double c = obj_sign_ * lp_.variable(i).cost;
      obj_const_ += c * shift_[i];
      auto [a, b] = col_of_var_[i];
      if (b >= 0) {
        cost_[a] += c;
        cost_[b] -= c;
      } else {
        cost_[a] += flip_[i] ? -c : c;
      }
    }

    // Rows: accumulate terms per variable, apply shifts.
    const int m = lp_.num_constraints();
    dense_.assign(m, std::vector<double>(cols(), 0.0));
    rhs_.assign(m, 0.0);
    for (int r = 0; r < m; ++r) {
      const auto& con = lp_.constraint(r);
      std::map<int, double> acc;
      for (const auto& [var, coeff] : con.terms) acc[var] += coeff;
      double b = con.rhs;
      for (const auto& [var, coeff] : acc) {
        b -= coeff * shift_[var];
        auto [p, q] = col_of_var_[var];
        if (q >= 0) {
          dense_[r][p] += coeff;
          dense_[r][q] -= coeff;
        } else {
          dense_[r][p] += flip_[var] ? -coeff : coeff;
        }
      }
      rhs_[r] = b;
      bscale_ = std::max(bscale_, std::abs(b));
    }

    // Slack columns.
    slack_of_row_.assign(m, -1);
    for (int r = 0; r < m; ++r) {
      Sense s = lp_.constraint(r).sense;
      if (s == Sense::Equal) continue;
      int j = new_col(kInf);
      grow_rows();
      dense_[r][j] = (s == Sense::LessEqual) ? 1.0 : -1.0;
      slack_of_row_[r] = j;
    }

    // Initial basis: slack where it can carry the residual, else artificial.
    basis_.assign(m, -1);
    origin_col_.assign(m, -1);
    origin_sign_.assign(m, 1.0);
    status_.assign(cols(), AtLower);
    xb_.assign(m, 0.0);
    for (int r = 0; r < m; ++r) {
      double resid = rhs_[r];  // all structural columns start at 0
      Sense s = lp_.constraint(r).sense;
      int sl = slack_of_row_[r];
      if (sl >= 0) {
        origin_col_[r] = sl;
        origin_sign_[r] = dense_[r][sl];
        double sval = (s == Sense::LessEqual) ? resid : -resid;
        if (sval >= 0.0) {
          basis_[r] = sl;
          xb_[r] = sval;
          status_[sl] = Basic;
          continue;
        }
      }
      int art = new_col(kInf);
      grow_rows();
      dense_[r][art] = (resid >= 0.0) ? 1.0 : -1.0;
      artificials_.push_back(art);
      basis_[r] = art;
      xb_[r] = std::abs(resid);
      status_[art] = Basic;
      if (sl < 0) {
        origin_col_[r] = art;
        origin_sign_[r] = dense_[r][art];
      }
    }
    cost_.resize(cols(), 0.0);

    // Tableau T = B^-1 A with the initial basis; initial B is +-identity,
    // so rows with a negative basic coefficient are negated.
    tab_ = dense_;
    for (int r = 0; r < rows(); ++r) {
      if (dense_[r][basis_[r]] < 0.0)
        for (int j = 0; j < cols(); ++j) tab_[r][j] = -tab_[r][j];
    }
  }

  int new_col(double ub) {
    upper_.push_back(ub);
    return static_cast<int>(upper_.size()) - 1;
  }

  void grow_rows() {
    for (auto& row : dense_) row.resize(upper_.size(), 0.0);
    for (auto& row : tab_) row.resize(upper_.size(), 0.0);
    status_.resize(upper_.size(), AtLower);
  }

  double value_of(int j) const {
    if (status_[j] == Basic) {
      for (int r = 0; r < rows(); ++r)
        if (basis_[r] == j) return xb_[r];
    }
    return status_[j] == AtUpper ? upper_[j] : 0.0;
  }

  std::vector<double> duals(const std::vector<double>& c) const {
    std::vector<double> y(rows(), 0.0);
    for (int i = 0; i < rows(); ++i) {
      double v = 0.0;
      for (int r = 0; r < rows(); ++r) v += c[basis_[r]] * tab_[r][origin_col_[i]];
      y[i] = v * origin_sign_[i];
    }
    return y;
  }

  // One simplex phase with costs c. Bland's rule throughout.
  Status iterate(const std::vector<double>& c) {
    for (int iter = 0; iter < opts_.max_iterations; ++iter) {
      std::vector<double> y = duals(c);
      // Optimality tolerance scaled by the dual magnitudes: reduced-cost
      // noise grows with them and must not masquerade as an improving ray.
      double dual_scale = 1.0;
      for (double v : y) dual_scale = std::max(dual_scale, std::abs(v));
      const double enter_tol = opts_.opt_tol * dual_scale;
      // Bland: smallest eligible index enters.
      int enter = -1;
      double dir = 1.0;
      for (int j = 0; j < cols(); ++j) {
        if (status_[j] == Basic || upper_[j] == 0.0) continue;
        double d = reduced_cost(j, c, y);
        if (status_[j] == AtLower && d < -enter_tol) {
          enter = j;
          dir = 1.0;
          break;
        }
        if (status_[j] == AtUpper && d > enter_tol) {
          enter = j;
          dir = -1.0;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;

      // Ratio test: basic vars must stay within [0, upper]; entering var
      // may also flip to its other bound. Ties: smallest basic index leaves.
      double limit = upper_[enter];
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int r = 0; r < rows(); ++r) {
        double w = dir * tab_[r][enter];
        double step;
        bool to_upper;
        if (w > kPivotTol) {
          step = xb_[r] / w;
          to_upper = false;
        } else if (w < -kPivotTol && upper_[basis_[r]] != kInf) {
          step = (upper_[basis_[r]] - xb_[r]) / (-w);
          to_upper = true;
        } else {
          continue;
        }
        if (step < 0.0) step = 0.0;
        if (step < limit - 1e-12) {
          limit = step;
          leave_row = r;
          leave_to_upper = to_upper;
        } else if (step <= limit + 1e-12 && leave_row >= 0 &&
                   basis_[r] < basis_[leave_row]) {
          leave_row = r;
          leave_to_upper = to_upper;
        }
      }
      if (limit == kInf) {
        // Confirm the ray: a marginal reduced cost on top of huge duals is
        // numerical noise, not unboundedness.
        double d = reduced_cost(enter, c, y);
        double scale = 1.0;
        for (int r = 0; r < rows(); ++r) scale = std::max(scale, std::abs(y[r]));
        if (std::abs(d) <= 1e-9 * scale) {
          status_[enter] = status_[enter];  // leave as is; try other columns
          continue;
        }
        return Status::Unbounded;
      }

      if (leave_row < 0) {
        // Bound flip: entering traverses its whole range.
        for (int r = 0; r < rows(); ++r) xb_[r] -= dir * limit * tab_[r][enter];
        status_[enter] = (status_[enter] == AtLower) ? AtUpper : AtLower;
        continue;
      }

      // Pivot.
      int leave_col = basis_[leave_row];
      double enter_start = (status_[enter] == AtUpper) ? upper_[enter] : 0.0;
      for (int r = 0; r < rows(); ++r) xb_[r] -= dir * limit * tab_[r][enter];
      double piv = tab_[leave_row][enter];
      for (int j = 0; j < cols(); ++j) tab_[leave_row][j] /= piv;
      xb_[leave_row] = enter_start + dir * limit;
      for (int r = 0; r < rows(); ++r) {
        if (r == leave_row) continue;
        double f = tab_[r][enter];
        if (std::abs(f) < 1e-13) continue;
        for (int j = 0; j < cols(); ++j) tab_[r][j] -= f * tab_[leave_row][j];
      }
      status_[leave_col] = leave_to_upper ? AtUpper : AtLower;
      status_[enter] = Basic;
      basis_[leave_row] = enter;
    }
    return Status::IterationLimit;
  }

  double reduced_cost(int j, const std::vector<double>& c,
                      const std::vector<double>& y) const {
    double d = c[j];
    for (int r = 0; r < rows(); ++r) {
      double a = dense_[r][j];
      if (a != 0.0) d -= y[r] * a;
    }
    return d;
  }

  void pivot_out_artificials() {
    for (int r = 0; r < rows(); ++r) {
      int b = basis_[r];
      if (std::find(artificials_.begin(), artificials_.end(), b) == artificials_.end())
        continue;
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        // Only columns sitting at zero keep this a pivot in place.
        if (status_[j] != AtLower || upper_[j] == 0.0) continue;
        if (std::abs(tab_[r][j]) > 1e-7) {
          enter = j;
          break;
        }
      }
      if (enter < 0) continue;  // redundant row; artificial stays basic at 0
      // Degenerate pivot at value 0: tableau changes, the point does not.
      double piv = tab_[r][enter];
      for (int j = 0; j < cols(); ++j) tab_[r][j] /= piv;
      xb_[r] = 0.0;
      for (int k = 0; k < rows(); ++k) {
        if (k == r) continue;
        double f = tab_[k][enter];
        if (std::abs(f) < 1e-13) continue;
        for (int j = 0; j < cols(); ++j) tab_[k][j] -= f * tab_[r][j];
      }
      status_[b] = AtLower;
      status_[enter] = Basic;
      basis_[r] = enter;
    }
  }

  void extract(Solution& sol) const {
    std::vector<double> val(cols(), 0.0);
    for (int j = 0; j < cols(); ++j)
      if (status_[j] == AtUpper) val[j] = upper_[j];
    for (int r = 0; r < rows(); ++r) val[basis_[r]] = xb_[r];

    const int n = lp_.num_variables();
    sol.x.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      auto [a, b] = col_of_var_[i];
      if (b >= 0)
        sol.x[i] = val[a] - val[b];
      else
        sol.x[i] = flip_[i] ? shift_[i] - val[a] : shift_[i] + val[a];
    }
    double obj = obj_const_;
    for (int j = 0; j < cols(); ++j) obj += cost_[j] * val[j];
    sol.objective = obj_sign_ * obj;

    std::vector<double> y = duals(cost_);
    sol.dual.assign(rows(), 0.0);
    for (int r = 0; r < rows(); ++r) sol.dual[r] = obj_sign_ * y[r];
    sol.reduced_cost.assign(n, 0.0);
    for (int i = 0; i < n; ++i) sol.reduced_cost[i] = lp_.variable(i).cost;
    for (int r = 0; r < rows(); ++r)
      for (const auto& [v, c] : lp_.constraint(r).terms)
        sol.reduced_cost[v] -= sol.dual[r] * c;
    sol.bound = sol.objective;
  }

  enum ColStatus { AtLower, AtUpper, Basic };

  const LinearProgram& lp_;
  const Options& opts_;
  std::vector<std::pair<int, int>> col_of_var_;
  std::vector<double> shift_;
  std::vector<bool> flip_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<std::vector<double>> dense_;  // original equality-form rows
  std::vector<std::vector<double>> tab_;    // B^-1 * dense
  std::vector<double> rhs_;
  std::vector<double> xb_;
  std::vector<int> basis_;
  std::vector<int> slack_of_row_;
  std::vector<int> origin_col_;
  std::vector<double> origin_sign_;
  std::vector<int> artificials_;
  std::vector<ColStatus> status_;
  double obj_sign_ = 1.0;
  double obj_const_ = 0.0;
  double bscale_ = 1.0;
};

}  // namespace

Solution solve_lp(const LinearProgram& lp, const Options& opts) {
  Simplex s(lp, opts);
  return s.run();
}

}  // namespace gridmech::solver
