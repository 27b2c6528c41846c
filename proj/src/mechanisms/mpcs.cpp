#include <cmath>

#include "gridmech/mechanisms/mpcs.hpp"
#include "gridmech/solver/qp.hpp"

namespace gridmech::mechanisms {

using solver::LinearProgram;
using solver::LinExpr;
using solver::QuadraticProgram;
using solver::Sense;
using solver::Solution;

AuctionProblem::ViolationResult ccg_violation(const AuctionProblem& problem,
                                              const std::vector<double>& utilities) {
  if (static_cast<int>(utilities.size()) != problem.num_bidders())
    throw AuctionError("ccg_violation: one revealed utility per bidder expected");
  for (double u : utilities)
    if (u < -1e-7) throw AuctionError("ccg_violation: negative revealed utility");
  return problem.min_cost_coalition(utilities);
}

namespace {

struct CoreRow {
  Subset blocked;  // winners shut out by the blocking coalition
  double bound;    // J(B_{L \ blocked}) - J(B)
};

// Relaxed master: max total utility subject to the generated rows and the
// per-bidder VCG caps; then the VCG-nearest point at that utility level.
std::vector<double> master_and_tie(const std::vector<CoreRow>& rows,
                                   const std::vector<double>& vcg_cap, double* nu_out) {
  const int n = static_cast<int>(vcg_cap.size());
  LinearProgram lp;
  for (int l = 0; l < n; ++l)
    lp.add_variable("u" + std::to_string(l), 0.0, std::max(0.0, vcg_cap[l]), 1.0);
  for (size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::pair<int, double>> terms;
    for (int l = 0; l < n; ++l)
      if (rows[r].blocked >> l & 1) terms.emplace_back(l, 1.0);
    lp.add_constraint("core" + std::to_string(r), terms, Sense::LessEqual, rows[r].bound);
  }
  lp.set_maximize(true);
  Solution lin = solve_lp(lp);
  if (!lin.optimal()) throw AuctionError("mpcs: master subproblem failed");
  double nu = lin.objective;
  if (nu_out != nullptr) *nu_out = nu;

  QuadraticProgram qp;
  qp.lp = lp;
  qp.lp.set_maximize(false);
  std::vector<std::pair<int, double>> sum;
  for (int l = 0; l < n; ++l) {
    qp.lp.set_cost(l, 0.0);
    sum.emplace_back(l, 1.0);
    qp.add_squared_term(LinExpr{{{l, 1.0}}, -std::max(0.0, vcg_cap[l])});
  }
  qp.lp.add_constraint("level", sum, Sense::Equal, nu);
  Solution tie = solve_qp(qp);
  if (!tie.optimal()) throw AuctionError("mpcs: tie-break subproblem failed");
  return tie.x;
}

}  // namespace

PaymentOutcome mpcs(const AuctionProblem& problem, const std::vector<BidCurve>* true_costs,
                    CcgTrace* trace) {
  PaymentOutcome out = vcg(problem, true_costs);
  out.rule = "mpcs";
  const AuctionEval& full = problem.evaluate(problem.all());
  const std::vector<double> vcg_cap = out.revealed_utility;
  const int n = problem.num_bidders();

  Subset winner_mask = 0;
  for (int w : problem.winners()) winner_mask |= Subset{1} << w;

  std::vector<double> u = vcg_cap;
  std::vector<CoreRow> rows;
  const long max_iters = (1L << std::min(20, n)) + 8;
  for (long k = 0; k < max_iters; ++k) {
    AuctionProblem::ViolationResult viol = ccg_violation(problem, u);
    double held = full.cost;
    for (int l = 0; l < n; ++l)
      if (winner_mask >> l & 1) held += u[l];
    double tol = 1e-7 * (1.0 + std::abs(held));

    if (trace != nullptr) {
      CcgIteration it;
      it.z = viol.z;
      it.blocking_coalition = viol.coalition;
      it.utilities = u;
      trace->iterations.push_back(it);
    }
    if (viol.z >= held - tol) {
      if (trace != nullptr) trace->converged = true;
      break;
    }
    Subset blocked = winner_mask & ~viol.coalition;
    if (blocked == 0)
      throw AuctionError("mpcs: violated certificate without blocked winners");
    // J(B_{L \ blocked}) recovered from the inflated optimum: subtract the
    // uplifts of the winners inside the blocking coalition.
    double j_rest = viol.z;
    for (int l = 0; l < n; ++l)
      if ((winner_mask >> l & 1) && (viol.coalition >> l & 1)) j_rest -= u[l];
    rows.push_back({blocked, j_rest - full.cost});

    double nu = 0.0;
    u = master_and_tie(rows, vcg_cap, &nu);
    if (trace != nullptr) trace->iterations.back().nu = nu;
  }

  for (int l = 0; l < n; ++l) {
    out.revealed_utility[l] = u[l];
    out.payment[l] = (std::abs(out.allocation[l]) > 1e-9)
                         ? problem.curves()[l].value(out.allocation[l]) + u[l]
                         : 0.0;
  }
  double total = 0.0;
  for (double p : out.payment) total += p;
  out.operator_utility = -total;
  if (true_costs != nullptr)
    for (int l = 0; l < n; ++l)
      out.true_utility[l] = out.payment[l] - (*true_costs)[l].value(out.allocation[l]);
  return out;
}

}  // namespace gridmech::mechanisms
