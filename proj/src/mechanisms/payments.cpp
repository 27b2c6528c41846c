#include <cmath>

#include "gridmech/mechanisms/mpcs.hpp"
#include "gridmech/mechanisms/payments.hpp"

namespace gridmech::mechanisms {

namespace {

PaymentOutcome outcome_shell(const AuctionProblem& problem, std::string rule) {
  const AuctionEval& full = problem.evaluate(problem.all());
  if (!full.feasible) throw AuctionError(rule + ": market infeasible under the bid profile");
  PaymentOutcome out;
  out.rule = std::move(rule);
  out.allocation = full.x;
  out.payment.assign(problem.num_bidders(), 0.0);
  out.revealed_utility.assign(problem.num_bidders(), 0.0);
  out.true_utility.assign(problem.num_bidders(), 0.0);
  return out;
}

void finish(const AuctionProblem& problem, const std::vector<BidCurve>* true_costs,
            PaymentOutcome& out) {
  double total = 0.0;
  for (int l = 0; l < problem.num_bidders(); ++l) {
    if (std::abs(out.allocation[l]) <= 1e-9) {
      out.payment[l] = 0.0;
      out.revealed_utility[l] = 0.0;
    }
    total += out.payment[l];
    if (true_costs != nullptr)
      out.true_utility[l] = out.payment[l] - (*true_costs)[l].value(out.allocation[l]);
  }
  out.operator_utility = -total;
  out.has_true_utilities = true_costs != nullptr;
}

}  // namespace

PaymentOutcome pay_as_bid(const AuctionProblem& problem,
                          const std::vector<BidCurve>* true_costs) {
  PaymentOutcome out = outcome_shell(problem, "payasbid");
  for (int l = 0; l < problem.num_bidders(); ++l) {
    out.payment[l] = problem.curves()[l].value(out.allocation[l]);
    out.revealed_utility[l] = 0.0;
  }
  finish(problem, true_costs, out);
  return out;
}

PaymentOutcome vcg(const AuctionProblem& problem, const std::vector<BidCurve>* true_costs) {
  PaymentOutcome out = outcome_shell(problem, "vcg");
  const AuctionEval& full = problem.evaluate(problem.all());
  for (int l = 0; l < problem.num_bidders(); ++l) {
    if (std::abs(out.allocation[l]) <= 1e-9) continue;
    const AuctionEval& without = problem.evaluate_without(l);
    if (!without.feasible)
      throw AuctionError("vcg: removing bidder " + problem.names()[l] +
                         " leaves the market infeasible");
    double bid = problem.curves()[l].value(out.allocation[l]);
    out.payment[l] = bid + (without.cost - full.cost);
    out.revealed_utility[l] = without.cost - full.cost;
  }
  finish(problem, true_costs, out);
  return out;
}

PaymentOutcome lmp(const AuctionProblem& problem, const std::vector<BidCurve>* true_costs) {
  if (!problem.has_prices())
    throw AuctionError("lmp: problem does not expose nodal prices");
  PaymentOutcome out = outcome_shell(problem, "lmp");
  const AuctionEval& full = problem.evaluate(problem.all());
  for (int l = 0; l < problem.num_bidders(); ++l) {
    out.payment[l] = full.nodal_price[l] * out.allocation[l];
    out.revealed_utility[l] = out.payment[l] - problem.curves()[l].value(out.allocation[l]);
  }
  finish(problem, true_costs, out);
  return out;
}

double deviation_bound(const AuctionProblem& problem, const std::vector<BidCurve>& true_costs,
                       int bidder, const std::string& rule) {
  auto truthful = problem.with_curve(bidder, true_costs.at(bidder));
  PaymentOutcome under_rule;
  if (rule == "payasbid")
    under_rule = pay_as_bid(*truthful, &true_costs);
  else if (rule == "vcg")
    under_rule = vcg(*truthful, &true_costs);
  else if (rule == "lmp")
    under_rule = lmp(*truthful, &true_costs);
  else if (rule == "mpcs")
    under_rule = mpcs(*truthful, &true_costs);
  else
    throw AuctionError("deviation_bound: unknown rule '" + rule + "'");

  const AuctionEval& full = truthful->evaluate(truthful->all());
  const AuctionEval& without = truthful->evaluate_without(bidder);
  if (!without.feasible)
    throw AuctionError("deviation_bound: removal of " + problem.names()[bidder] +
                       " is infeasible");
  double vcg_utility = without.cost - full.cost;
  return vcg_utility - under_rule.true_utility.at(bidder);
}

}  // namespace gridmech::mechanisms
