#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gridmech/solver/qp.hpp"

namespace gridmech::solver {

void QuadraticProgram::add_squared_term(LinExpr expr, double weight) {
  if (!(weight > 0.0)) throw SolverError("add_squared_term: weight must be positive");
  terms_.emplace_back(std::move(expr), weight);
}

namespace {

// All constraints in row form a.x <= b; equalities tracked separately.
struct Rows {
  Eigen::MatrixXd ai;  // inequality rows
  Eigen::VectorXd bi;
  Eigen::MatrixXd ae;  // equality rows
  Eigen::VectorXd be;
  std::vector<int> ineq_source;  // lp constraint index, or -1 for bounds
  std::vector<int> eq_source;
};

Rows collect_rows(const LinearProgram& lp) {
  const int n = lp.num_variables();
  std::vector<Eigen::VectorXd> ineq, eq;
  std::vector<double> bi, be;
  std::vector<int> isrc, esrc;
  auto dense_row = [&](const std::vector<std::pair<int, double>>& terms) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (auto [v, c] : terms) r[v] += c;
    return r;
  };
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& c = lp.constraint(i);
    Eigen::VectorXd r = dense_row(c.terms);
    switch (c.sense) {
      case Sense::LessEqual:
        ineq.push_back(r);
        bi.push_back(c.rhs);
        isrc.push_back(i);
        break;
      case Sense::GreaterEqual:
        ineq.push_back(-r);
        bi.push_back(-c.rhs);
        isrc.push_back(i);
        break;
      case Sense::Equal:
        eq.push_back(r);
        be.push_back(c.rhs);
        esrc.push_back(i);
        break;
    }
  }
  for (int v = 0; v < n; ++v) {
    const auto& var = lp.variable(v);
    if (var.lb == var.ub && std::isfinite(var.lb)) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      r[v] = 1.0;
      eq.push_back(r);
      be.push_back(var.lb);
      esrc.push_back(-1);
      continue;
    }
    if (std::isfinite(var.ub)) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      r[v] = 1.0;
      ineq.push_back(r);
      bi.push_back(var.ub);
      isrc.push_back(-1);
    }
    if (std::isfinite(var.lb)) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      r[v] = -1.0;
      ineq.push_back(r);
      bi.push_back(-var.lb);
      isrc.push_back(-1);
    }
  }
  Rows rows;
  rows.ai.resize(static_cast<int>(ineq.size()), n);
  rows.bi.resize(static_cast<int>(ineq.size()));
  for (size_t i = 0; i < ineq.size(); ++i) {
    rows.ai.row(static_cast<int>(i)) = ineq[i];
    rows.bi[static_cast<int>(i)] = bi[i];
  }
  rows.ae.resize(static_cast<int>(eq.size()), n);
  rows.be.resize(static_cast<int>(eq.size()));
  for (size_t i = 0; i < eq.size(); ++i) {
    rows.ae.row(static_cast<int>(i)) = eq[i];
    rows.be[static_cast<int>(i)] = be[i];
  }
  rows.ineq_source = std::move(isrc);
  rows.eq_source = std::move(esrc);
  return rows;
}

}  // namespace

Solution solve_qp(const QuadraticProgram& qp, const Options& opts) {
  const LinearProgram& lp = qp.lp;
  lp.validate();
  if (lp.maximize()) throw SolverError("solve_qp: only minimization is supported");
  const int n = lp.num_variables();

  // Assemble 0.5 x'Qx + g'x + c0 with Q from the squared affine forms.
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  double c0 = 0.0;
  for (int v = 0; v < n; ++v) g[v] = lp.variable(v).cost;
  for (const auto& [expr, w] : qp.squared_terms()) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (auto [v, c] : expr.terms) a[v] += c;
    Q += 2.0 * w * a * a.transpose();
    g += 2.0 * w * expr.constant * a;
    c0 += w * expr.constant * expr.constant;
  }

  // Feasible start from the simplex on the linear part alone.
  LinearProgram feas = lp;
  for (int v = 0; v < n; ++v) feas.set_cost(v, 0.0);
  Solution start = solve_lp(feas, opts);
  if (!start.optimal()) {
    Solution sol;
    sol.status = start.status;
    return sol;
  }

  Rows rows = collect_rows(lp);
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(start.x.data(), n);

  const double act_tol = 1e-8;
  std::vector<int> working;  // indices into inequality rows
  for (int i = 0; i < rows.ai.rows(); ++i)
    if (std::abs(rows.ai.row(i).dot(x) - rows.bi[i]) <= act_tol) working.push_back(i);

  const int me = static_cast<int>(rows.ae.rows());
  Eigen::VectorXd ineq_dual = Eigen::VectorXd::Zero(rows.ai.rows());
  Eigen::VectorXd eq_dual = Eigen::VectorXd::Zero(me);

  const int max_iter = 200 + 20 * (n + static_cast<int>(rows.ai.rows()));
  for (int iter = 0; iter < max_iter; ++iter) {
    const int mw = static_cast<int>(working.size());
    const int m = me + mw;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = Q;
    for (int i = 0; i < me; ++i) {
      kkt.block(n + i, 0, 1, n) = rows.ae.row(i);
      kkt.block(0, n + i, n, 1) = rows.ae.row(i).transpose();
    }
    for (int i = 0; i < mw; ++i) {
      kkt.block(n + me + i, 0, 1, n) = rows.ai.row(working[i]);
      kkt.block(0, n + me + i, n, 1) = rows.ai.row(working[i]).transpose();
    }
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -(Q * x + g);
    rhs.tail(m).setZero();

    // Tiny Tikhonov term on the dual block keeps dependent working sets solvable.
    for (int i = 0; i < m; ++i) kkt(n + i, n + i) = -1e-12;
    Eigen::VectorXd sol_vec = kkt.fullPivLu().solve(rhs);
    Eigen::VectorXd p = sol_vec.head(n);
    Eigen::VectorXd lam = sol_vec.tail(m);

    if (p.lpNorm<Eigen::Infinity>() <= 1e-9) {
      // In this KKT arrangement the usual multiplier of a working row
      // a.x <= b is +lambda; a negative one means the row blocks descent.
      int drop = -1;
      double most_neg = -1e-8;
      for (int i = 0; i < mw; ++i) {
        double mult = lam[me + i];
        if (mult < most_neg) {
          most_neg = mult;
          drop = i;
        }
      }
      if (drop < 0) {
        Solution out;
        out.status = Status::Optimal;
        out.x.assign(n, 0.0);
        for (int v = 0; v < n; ++v) out.x[v] = x[v];
        out.objective = 0.5 * x.dot(Q * x) + g.dot(x) + c0;
        out.dual.assign(lp.num_constraints(), 0.0);
        for (int i = 0; i < me; ++i)
          if (rows.eq_source[i] >= 0) out.dual[rows.eq_source[i]] = -lam[i];
        for (int i = 0; i < mw; ++i) {
          int src = rows.ineq_source[working[i]];
          if (src >= 0) {
            // d(obj)/d(rhs): -mu for <=, +mu for >= (which was flipped).
            double mult = -lam[me + i];
            if (lp.constraint(src).sense == Sense::GreaterEqual) mult = -mult;
            out.dual[src] = mult;
          }
        }
        out.bound = out.objective;
        return out;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    // Step toward the EQP minimizer, stopping at the first blocking row.
    double alpha = 1.0;
    int block = -1;
    for (int i = 0; i < rows.ai.rows(); ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) continue;
      double ap = rows.ai.row(i).dot(p);
      if (ap > 1e-11) {
        double room = rows.bi[i] - rows.ai.row(i).dot(x);
        double a = room / ap;
        if (a < alpha - 1e-12) {
          alpha = std::max(0.0, a);
          block = i;
        }
      }
    }
    x += alpha * p;
    if (block >= 0) working.push_back(block);
  }
  throw SolverError("solve_qp: active-set iteration limit");
}

}  // namespace gridmech::solver
