#pragma once

#include "gridmech/markets/sequential.hpp"

namespace gridmech::markets {

/// Marginal-pricing surplus bookkeeping for one stage and area.
struct SurplusParts {
  double consumer = 0.0;
  double producer = 0.0;
  double congestion = 0.0;
  double total() const { return consumer + producer + congestion; }
};

struct CostAllocation {
  // Indexed [area]; balancing additionally [scenario][area].
  std::vector<SurplusParts> reserve, day_ahead;
  std::vector<std::vector<SurplusParts>> balancing;
  std::vector<std::vector<double>> area_cost;  // [scenario][area], J_a^s

  double scenario_sum(int s) const {
    double v = 0.0;
    for (double c : area_cost.at(s)) v += c;
    return v;
  }
};

/// Splits every stage cost into per-area consumer/producer surpluses and
/// congestion rents; tie-line rents go half to each adjacent area. The
/// per-area costs sum to the stage costs exactly.
CostAllocation allocate_area_costs(const SystemData& sys, const ClearingOutcome& outcome);

}  // namespace gridmech::markets
