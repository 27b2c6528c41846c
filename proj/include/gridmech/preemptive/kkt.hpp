#pragma once

#include "gridmech/markets/sequential.hpp"
#include "gridmech/solver/milp.hpp"

namespace gridmech::preemptive {

/// Variable/row bookkeeping for the single-level reformulation: lower-level
/// reserve and day-ahead markets are embedded through their stationarity,
/// feasibility, and complementarity conditions; balancing stays primal-only
/// in the upper level.
struct KktSystem {
  solver::MixedIntegerProgram mip;

  // Upper level
  std::vector<int> chi;  // per link
  struct ScenarioVars {
    std::vector<int> up, dn;   // per generator
    std::vector<int> shed;     // per node
    std::vector<int> spill;    // per wind plant
    std::vector<int> flow;     // per line
    std::vector<int> angle;    // per node
  };
  std::vector<ScenarioVars> scen;

  // Reserve stage primal and duals
  std::vector<int> r_up, r_dn;          // per generator
  std::vector<int> e_up, e_dn;          // per link
  std::vector<int> mu_r_up, mu_r_dn;    // per generator (capacity bound)
  std::vector<int> mu_rr_up, mu_rr_dn;  // per area (requirement)
  std::vector<int> zeta_l_up, zeta_u_up, zeta_l_dn, zeta_u_dn;  // per link

  // Day-ahead stage primal and duals
  std::vector<int> p;        // per generator
  std::vector<int> w;        // per wind plant
  std::vector<int> f;        // per line
  std::vector<int> theta;    // per node
  std::vector<int> lambda;   // per node (balance)
  std::vector<int> mu_pl, mu_pu;  // per generator
  std::vector<int> mu_wu;         // per wind plant
  std::vector<int> lambda_f;      // per line (flow definition)
  std::vector<int> zeta_l, zeta_u;  // per line (capacity)

  int reserve_pairs = 0;
  int day_ahead_pairs = 0;
};

/// Assembles the KKT single-level program. Links listed in `free_links` get
/// chi in [0,1]; all others stay at the baseline share. Tie-line flows of
/// `frozen` links are pinned to their day-ahead values in every scenario.
KktSystem build_kkt(const markets::SystemData& sys,
                    const markets::TransmissionShares& baseline,
                    const std::vector<int>& free_links, const std::vector<int>& frozen);

}  // namespace gridmech::preemptive
