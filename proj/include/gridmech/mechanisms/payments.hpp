#pragma once

#include "gridmech/mechanisms/auction.hpp"

namespace gridmech::mechanisms {

struct PaymentOutcome {
  std::string rule;
  std::vector<double> allocation;
  std::vector<double> payment;
  std::vector<double> revealed_utility;       // p_l - b_l(x_l)
  std::vector<double> true_utility;           // p_l - c_l(x_l), when costs given
  double operator_utility = 0.0;              // -(sum of payments) - d
  bool has_true_utilities = false;

  double total_payment() const {
    double t = 0.0;
    for (double p : payment) t += p;
    return t;
  }
};

/// p_l = b_l(x_l): revealed utilities vanish, outcome sits in the revealed core.
PaymentOutcome pay_as_bid(const AuctionProblem& problem,
                          const std::vector<BidCurve>* true_costs = nullptr);

/// Clarke pivot: p_l = b_l(x_l) + J(B_{-l}) - J(B). Throws when a winner's
/// removal makes the market infeasible.
PaymentOutcome vcg(const AuctionProblem& problem,
                   const std::vector<BidCurve>* true_costs = nullptr);

/// Nodal-price payments; needs a network problem with meaningful duals.
PaymentOutcome lmp(const AuctionProblem& problem,
                   const std::vector<BidCurve>* true_costs = nullptr);

/// Lemma-style bound on the profit of a unilateral deviation by `bidder`:
/// the gap between its truthful VCG utility and its utility under `rule`
/// when bidding its true cost against the fixed profile of the others.
double deviation_bound(const AuctionProblem& problem, const std::vector<BidCurve>& true_costs,
                       int bidder, const std::string& rule);

}  // namespace gridmech::mechanisms
