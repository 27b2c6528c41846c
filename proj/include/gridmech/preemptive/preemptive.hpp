#pragma once

#include <optional>
#include <string>

#include "gridmech/markets/cost_allocation.hpp"
#include "gridmech/preemptive/kkt.hpp"

namespace gridmech::preemptive {

class PreemptiveError : public std::runtime_error {
 public:
  explicit PreemptiveError(const std::string& what) : std::runtime_error(what) {}
};

struct PreemptiveInstance {
  markets::SystemData sys;
  markets::TransmissionShares baseline;  // existing cross-border agreements
  markets::Coalition coalition = 0;      // empty means existing arrangements
};

struct PreemptiveResult {
  markets::Coalition coalition = 0;
  double expected_cost = 0.0;                // J(C)
  markets::TransmissionShares shares;        // chosen chi on coalition links
  markets::ClearingOutcome outcome;          // stage outcomes at the optimum
  double gap = 0.0;
  long nodes = 0;
  double scenario_cost(int s) const { return outcome.scenario_total(s); }
};

/// Coalition-dependent transmission allocation: chooses chi on the links
/// interior to the coalition, anticipating all three floors. Solved as a
/// KKT single-level program with complementarity branching; the result is
/// re-cleared stage by stage before being reported.
PreemptiveResult solve_preemptive(const PreemptiveInstance& instance,
                                  const solver::Options& opts = {});

struct ViolationOutcome {
  markets::Coalition coalition = 0;
  double total_with_fees = 0.0;  // min_C J(C) + sum_C beta
  double coalition_cost = 0.0;   // J(C) at the minimizer
  double gap = 0.0;
};

/// Benefit-violation subproblem: finds the coalition minimizing
/// J(C) + sum_{a in C} beta_a with one activation binary per area.
ViolationOutcome solve_violation(const PreemptiveInstance& instance,
                                 const std::vector<double>& beta,
                                 const solver::Options& opts = {});

/// Memo of coalition solves persisted as JSON lines keyed by coalition mask.
class ResultsLedger {
 public:
  explicit ResultsLedger(std::string path) : path_(std::move(path)) { load(); }
  std::optional<PreemptiveResult> lookup(markets::Coalition c) const;
  void record(const PreemptiveResult& result, double wall_seconds);

 private:
  void load();
  std::string path_;
  std::vector<std::pair<markets::Coalition, double>> entries_;  // mask, J
  std::vector<std::vector<double>> chis_;
};

/// Expected cost under the existing arrangements (no coalition), used for
/// the J(empty) reference and the v(C) = J(empty) - J(C) values.
double sequential_expected_cost(const PreemptiveInstance& instance);

}  // namespace gridmech::preemptive
