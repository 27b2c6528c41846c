#include <algorithm>
#include <cmath>
#include <queue>

#include "gridmech/solver/milp.hpp"

namespace gridmech::solver {

void MixedIntegerProgram::mark_binary(int var) {
  if (var < 0 || var >= lp.num_variables()) throw SolverError("mark_binary: bad variable");
  binaries_.push_back(var);
}

void MixedIntegerProgram::add_complementarity(std::string name, LinExpr a, LinExpr b,
                                              double big_m_a, double big_m_b) {
  pairs_.push_back({std::move(name), std::move(a), std::move(b), big_m_a, big_m_b});
}

void MixedIntegerProgram::validate(bool require_bigm) const {
  lp.validate();
  for (int v : binaries_) {
    const auto& var = lp.variable(v);
    if (var.lb < -1e-9 || var.ub > 1.0 + 1e-9)
      throw SolverError("binary variable '" + var.name + "' has bounds outside [0,1]");
  }
  if (require_bigm) {
    for (const auto& p : pairs_)
      if (!(p.big_m_a > 0.0) || !(p.big_m_b > 0.0))
        throw SolverError("complementarity pair '" + p.name +
                          "': big-M encoding requested but no valid big-M given");
  }
}

namespace {

struct BoundFix {
  int var;
  double lb, ub;
};

struct RowFix {
  int pair;
  bool side_a;  // force a == 0 (else b == 0)
};

struct Node {
  double bound;
  long id;
  std::vector<BoundFix> bounds;
  std::vector<RowFix> rows;
  bool operator>(const Node& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id > o.id;
  }
};

// A lone nonnegative variable is forced to zero by a bound fix, anything
// else by an equality row.
bool lone_variable(const LinExpr& e, int* var) {
  if (e.constant != 0.0 || e.terms.size() != 1 || e.terms[0].second == 0.0) return false;
  *var = e.terms[0].first;
  return true;
}

class BranchAndBound {
 public:
  BranchAndBound(const MixedIntegerProgram& mip, const Options& opts)
      : mip_(mip), opts_(opts) {}

  Solution run() {
    mip_.validate(opts_.bigm_complementarities);
    base_ = mip_.lp;
    binaries_ = mip_.binaries();
    branch_pairs_ = !opts_.bigm_complementarities;
    if (opts_.bigm_complementarities) {
      for (const auto& p : mip_.pairs()) {
        int z = base_.add_variable("z[" + p.name + "]", 0.0, 1.0);
        binaries_.push_back(z);
        auto a = p.a.terms;
        a.emplace_back(z, -p.big_m_a);
        base_.add_constraint("bm_a[" + p.name + "]", a, Sense::LessEqual, -p.a.constant);
        auto b = p.b.terms;
        b.emplace_back(z, p.big_m_b);
        base_.add_constraint("bm_b[" + p.name + "]", b, Sense::LessEqual,
                             p.big_m_b - p.b.constant);
      }
    }

    Solution best;
    best.status = Status::Infeasible;
    double upper = opts_.cutoff;
    bool hit_node_limit = false;
    double global_bound = -kInf;
    long nodes = 0;
    long next_id = 0;

    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    open.push({-kInf, next_id++, {}, {}});

    while (!open.empty()) {
      Node node = open.top();
      open.pop();
      global_bound = node.bound;
      if (node.bound >= upper - gap_tol(upper)) {
        global_bound = std::min(upper, node.bound);
        break;
      }
      if (nodes >= opts_.max_nodes) {
        hit_node_limit = true;
        break;
      }
      ++nodes;

      LinearProgram lp = build_lp(node);
      Solution rel = solve_lp(lp, opts_);
      if (rel.status == Status::Infeasible) continue;
      if (rel.status != Status::Optimal) {
        best.status = rel.status;
        best.nodes = nodes;
        return best;
      }
      if (rel.objective >= upper - gap_tol(upper)) continue;

      int frac_var = pick_fractional(rel.x);
      int viol_pair = frac_var < 0 ? pick_violated_pair(rel.x) : -1;

      if (frac_var < 0 && viol_pair < 0) {
        upper = rel.objective;
        best = rel;
        best.status = Status::Optimal;
        continue;
      }

      if (frac_var >= 0) {
        for (double fix : {0.0, 1.0}) {
          Node child = node;
          child.id = next_id++;
          child.bound = rel.objective;
          child.bounds.push_back({frac_var, fix, fix});
          open.push(std::move(child));
        }
      } else {
        for (bool side_a : {true, false}) {
          Node child = node;
          child.id = next_id++;
          child.bound = rel.objective;
          child.rows.push_back({viol_pair, side_a});
          open.push(std::move(child));
        }
      }
    }

    if (open.empty()) global_bound = upper;
    best.nodes = nodes;
    best.bound = global_bound;
    if (std::isfinite(upper)) {
      if (best.x.empty()) best.objective = upper;  // cutoff is the incumbent
      best.gap = std::max(0.0, upper - global_bound);
      best.status = hit_node_limit ? Status::NodeLimit : Status::Optimal;
    } else if (hit_node_limit) {
      best.status = Status::NodeLimit;
      best.gap = kInf;
    }
    return best;
  }

 private:
  double gap_tol(double upper) const {
    return opts_.mip_abs_gap * (1.0 + (std::isfinite(upper) ? std::abs(upper) : 0.0));
  }

  LinearProgram build_lp(const Node& node) const {
    LinearProgram lp = base_;
    for (const auto& f : node.bounds) lp.set_bounds(f.var, f.lb, f.ub);
    for (const auto& f : node.rows) {
      const auto& p = mip_.pairs()[f.pair];
      const LinExpr& e = f.side_a ? p.a : p.b;
      int var = -1;
      if (lone_variable(e, &var)) {
        lp.set_bounds(var, 0.0, 0.0);
      } else {
        lp.add_constraint("fix[" + p.name + (f.side_a ? ":a]" : ":b]"), e.terms,
                          Sense::Equal, -e.constant);
      }
    }
    return lp;
  }

  int pick_fractional(const std::vector<double>& x) const {
    int pick = -1;
    double worst = opts_.int_tol;
    for (int v : binaries_) {
      double f = std::abs(x[v] - std::round(x[v]));
      if (f > worst) {
        worst = f;
        pick = v;
      }
    }
    return pick;
  }

  int pick_violated_pair(const std::vector<double>& x) const {
    if (!branch_pairs_) return -1;
    int pick = -1;
    double worst = opts_.comp_tol;
    for (int i = 0; i < static_cast<int>(mip_.pairs().size()); ++i) {
      const auto& p = mip_.pairs()[i];
      double va = std::max(0.0, p.a.value(x));
      double vb = std::max(0.0, p.b.value(x));
      double v = std::min(va, vb);
      if (v > worst) {
        worst = v;
        pick = i;
      }
    }
    return pick;
  }

  const MixedIntegerProgram& mip_;
  const Options& opts_;
  LinearProgram base_;
  std::vector<int> binaries_;
  bool branch_pairs_ = true;
};

}  // namespace

Solution solve_milp(const MixedIntegerProgram& mip, const Options& opts) {
  BranchAndBound bb(mip, opts);
  return bb.run();
}

}  // namespace gridmech::solver
