#pragma once

#include "gridmech/markets/system_data.hpp"
#include "gridmech/solver/linear_program.hpp"

namespace gridmech::markets {

struct ReserveOutcome {
  double cost = 0.0;
  std::vector<double> r_up, r_down;        // per generator, MW
  std::vector<double> link_up, link_down;  // per link, signed toward the receiving area
  std::vector<double> price_up, price_down;  // zonal duals per area
};

struct DayAheadOutcome {
  double cost = 0.0;
  std::vector<double> p;      // per generator
  std::vector<double> w;      // per wind plant
  std::vector<double> flow;   // per line
  std::vector<double> angle;  // per node
  std::vector<double> price;  // nodal
  std::vector<double> flow_rent;  // per line, capacity scarcity rent
};

struct BalancingOutcome {
  double cost = 0.0;
  std::vector<double> up, down;  // per generator
  std::vector<double> shed;      // per node
  std::vector<double> spill;     // per wind plant
  std::vector<double> flow;      // per line
  std::vector<double> price;     // nodal
  std::vector<double> flow_rent;  // per line, zero on frozen tie lines
  std::vector<bool> frozen;      // per line
};

struct ClearingOutcome {
  ReserveOutcome reserve;
  DayAheadOutcome day_ahead;
  std::vector<BalancingOutcome> balancing;  // per scenario

  double scenario_total(int s) const {
    return reserve.cost + day_ahead.cost + balancing.at(s).cost;
  }
  double expected_total(const SystemData& sys) const {
    double v = reserve.cost + day_ahead.cost;
    for (size_t s = 0; s < balancing.size(); ++s)
      v += sys.scenarios[s].probability * balancing[s].cost;
    return v;
  }
};

/// Reserve capacity market. Throws MarketError naming the uncoverable area
/// requirement on infeasibility.
ReserveOutcome clear_reserve(const SystemData& sys, const TransmissionShares& shares);

/// Day-ahead energy market with DC flows on the (1-chi) capacity shares.
DayAheadOutcome clear_day_ahead(const SystemData& sys, const TransmissionShares& shares,
                                const ReserveOutcome& reserve);

/// Balancing re-dispatch for one scenario. Tie-line flows across links in
/// frozen_links(sys, shares, coalition) stay at their day-ahead values.
BalancingOutcome clear_balancing(const SystemData& sys, const TransmissionShares& shares,
                                 const DayAheadOutcome& day_ahead,
                                 const ReserveOutcome& reserve, int scenario,
                                 Coalition coalition = 0);

ClearingOutcome run_sequential(const SystemData& sys, const TransmissionShares& shares,
                               Coalition coalition = 0);

}  // namespace gridmech::markets
