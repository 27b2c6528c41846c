#pragma once

#include "gridmech/mechanisms/payments.hpp"

namespace gridmech::mechanisms {

struct CcgIteration {
  double z = 0.0;                // inflated-auction optimum
  Subset blocking_coalition = 0;
  double nu = 0.0;               // optimal utility sum of the relaxed master
  std::vector<double> utilities; // candidate after the tie-break
};

struct CcgTrace {
  std::vector<CcgIteration> iterations;
  bool converged = false;
};

/// Blocking-coalition oracle: winners' bids inflated by their candidate
/// revealed utilities; returns the minimizing coalition and its cost.
AuctionProblem::ViolationResult ccg_violation(const AuctionProblem& problem,
                                              const std::vector<double>& utilities);

/// Maximum-payment core-selecting payments by core-constraint generation,
/// started from the VCG revealed utilities; the tie-break keeps the
/// utility vector nearest to VCG at maximal total utility.
PaymentOutcome mpcs(const AuctionProblem& problem,
                    const std::vector<BidCurve>* true_costs = nullptr,
                    CcgTrace* trace = nullptr);

}  // namespace gridmech::mechanisms
