#pragma once

#include "gridmech/mechanisms/auction.hpp"

namespace gridmech::mechanisms {

/// Generated family of reduced core constraints over winner subsets.
struct CoreDescription {
  std::vector<int> winners;
  struct Row {
    Subset blocked;  // K, subset of the winners
    double bound;    // J(B_{-K}) - J(B)
  };
  std::vector<Row> rows;
  double equality_level = 0.0;  // -J(B)
};

struct CoreCheck {
  bool in_core = true;
  double max_excess = 0.0;  // sum_K u - bound at the worst K
  Subset worst_coalition = 0;
};

/// Evaluates the 2^|W| reduced constraints of the revealed core against a
/// candidate revealed-utility vector for the bidders.
CoreCheck check_in_core(const AuctionProblem& problem, const std::vector<double>& utilities,
                        int max_winners = 10);

struct SupermodularityReport {
  bool supermodular = true;
  Subset witness_s = 0, witness_r = 0;  // J(S u R) + J(S n R) < J(S) + J(R)
  double violation = 0.0;
};

/// Exhaustive pairwise test of supermodularity of J over bidder subsets.
SupermodularityReport check_supermodular(const AuctionProblem& problem, int max_bidders = 12);

struct BidConditionReport {
  bool valid = true;
  std::vector<std::string> findings;
};

/// Marginally-increasing check for exclusive-block bids on the common grid.
BidConditionReport validate_marginal_increase(const SingleGoodMarket& market);

/// Polymatroid-style market validation: requirement function supermodular,
/// normalized, nondecreasing; bids convex and increasing.
BidConditionReport validate_requirement_market(const RequirementMarket& market);

struct CorePrices {
  // Per bidder: sampled price function psi_l on the quantity grid.
  std::vector<std::vector<std::pair<double, double>>> tables;
  bool bidder_optimality = false;  // condition (i) on the grid
  bool operator_optimality = false;  // condition (ii) via the coalition subproblem
};

/// Builds psi_l(x) = c_l(x) + u_l on the sampled domain (0 at the origin)
/// and verifies the competitive-equilibrium conditions numerically.
CorePrices construct_core_prices(const AuctionProblem& problem_with_costs,
                                 const std::vector<double>& core_point,
                                 int grid_samples = 50);

}  // namespace gridmech::mechanisms
