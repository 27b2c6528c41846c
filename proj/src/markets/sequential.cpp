#include <algorithm>
#include <cmath>

#include "gridmech/markets/sequential.hpp"

namespace gridmech::markets {

using solver::LinearProgram;
using solver::Options;
using solver::Sense;
using solver::Solution;
using solver::Status;

namespace {

void require_optimal(const Solution& s, const std::string& stage) {
  if (s.status == Status::Optimal) return;
  throw MarketError(stage + ": solver returned " + solver::status_name(s.status));
}

}  // namespace

ReserveOutcome clear_reserve(const SystemData& sys, const TransmissionShares& shares) {
  sys.validate();
  shares.validate(sys);
  const int ng = static_cast<int>(sys.generators.size());
  const int ne = static_cast<int>(sys.links.size());
  const int na = sys.num_areas();

  LinearProgram lp;
  std::vector<int> rup(ng), rdn(ng), eup(ne), edn(ne);
  for (int i = 0; i < ng; ++i) {
    const auto& g = sys.generators[i];
    rup[i] = lp.add_variable("r_up[" + g.name + "]", 0.0, g.res_cap_up, g.res_offer_up);
    rdn[i] = lp.add_variable("r_dn[" + g.name + "]", 0.0, g.res_cap_down, g.res_offer_down);
  }
  for (int e = 0; e < ne; ++e) {
    double cap = shares.chi[e] * sys.links[e].capacity;
    eup[e] = lp.add_variable("re_up[" + sys.links[e].name + "]", -cap, cap, 0.0);
    edn[e] = lp.add_variable("re_dn[" + sys.links[e].name + "]", -cap, cap, 0.0);
  }
  std::vector<int> req_up(na), req_dn(na);
  for (int a = 0; a < na; ++a) {
    std::vector<std::pair<int, double>> up_terms, dn_terms;
    for (int i = 0; i < ng; ++i) {
      if (sys.area_of_node(sys.generators[i].node) != a) continue;
      up_terms.emplace_back(rup[i], 1.0);
      dn_terms.emplace_back(rdn[i], 1.0);
    }
    for (int e = 0; e < ne; ++e) {
      int h = sys.incidence(e, a);
      if (h == 0) continue;
      up_terms.emplace_back(eup[e], static_cast<double>(h));
      dn_terms.emplace_back(edn[e], static_cast<double>(h));
    }
    req_up[a] = lp.add_constraint("rr_up[" + sys.areas[a] + "]", up_terms,
                                  Sense::GreaterEqual, sys.rr_up.at(a));
    req_dn[a] = lp.add_constraint("rr_dn[" + sys.areas[a] + "]", dn_terms,
                                  Sense::GreaterEqual, sys.rr_down.at(a));
  }

  Solution sol = solve_lp(lp);
  if (sol.status == Status::Infeasible) {
    // Name the first area whose requirement exceeds what it can reach.
    for (int a = 0; a < na; ++a) {
      double max_up = 0.0, max_dn = 0.0;
      for (int i = 0; i < ng; ++i) {
        if (sys.area_of_node(sys.generators[i].node) != a) continue;
        max_up += sys.generators[i].res_cap_up;
        max_dn += sys.generators[i].res_cap_down;
      }
      for (int e = 0; e < ne; ++e)
        if (sys.incidence(e, a) != 0) {
          max_up += shares.chi[e] * sys.links[e].capacity;
          max_dn += shares.chi[e] * sys.links[e].capacity;
        }
      if (sys.rr_up[a] > max_up + 1e-9)
        throw MarketError("reserve: upward requirement of area " + sys.areas[a] +
                          " is not coverable");
      if (sys.rr_down[a] > max_dn + 1e-9)
        throw MarketError("reserve: downward requirement of area " + sys.areas[a] +
                          " is not coverable");
    }
    throw MarketError("reserve: infeasible");
  }
  require_optimal(sol, "reserve");

  ReserveOutcome out;
  out.cost = sol.objective;
  out.r_up.resize(ng);
  out.r_down.resize(ng);
  for (int i = 0; i < ng; ++i) {
    out.r_up[i] = sol.x[rup[i]];
    out.r_down[i] = sol.x[rdn[i]];
  }
  out.link_up.resize(ne);
  out.link_down.resize(ne);
  for (int e = 0; e < ne; ++e) {
    out.link_up[e] = sol.x[eup[e]];
    out.link_down[e] = sol.x[edn[e]];
  }
  out.price_up.resize(na);
  out.price_down.resize(na);
  for (int a = 0; a < na; ++a) {
    out.price_up[a] = sol.dual[req_up[a]];
    out.price_down[a] = sol.dual[req_dn[a]];
  }
  return out;
}

DayAheadOutcome clear_day_ahead(const SystemData& sys, const TransmissionShares& shares,
                                const ReserveOutcome& reserve) {
  const int ng = static_cast<int>(sys.generators.size());
  const int nj = static_cast<int>(sys.wind.size());
  const int nn = static_cast<int>(sys.nodes.size());
  const int nl = static_cast<int>(sys.lines.size());

  LinearProgram lp;
  std::vector<int> p(ng), w(nj), f(nl), th(nn);
  for (int i = 0; i < ng; ++i) {
    const auto& g = sys.generators[i];
    double lo = reserve.r_down.at(i);
    double hi = g.capacity - reserve.r_up.at(i);
    if (lo > hi + 1e-9)
      throw MarketError("day-ahead: reserve schedule leaves generator " + g.name +
                        " with an empty dispatch window");
    p[i] = lp.add_variable("p[" + g.name + "]", lo, std::max(lo, hi), g.energy_offer);
  }
  for (int j = 0; j < nj; ++j)
    w[j] = lp.add_variable("w[" + sys.wind[j].name + "]", 0.0, sys.wind[j].expected, 0.0);
  for (int l = 0; l < nl; ++l) {
    double cap = (1.0 - shares.line_share(sys, l)) * sys.lines[l].capacity;
    f[l] = lp.add_variable("f[" + sys.lines[l].name + "]", -cap, cap, 0.0);
  }
  for (int n = 0; n < nn; ++n)
    th[n] = lp.add_variable("th[" + sys.nodes[n].name + "]",
                            n == 0 ? 0.0 : -solver::kInf, n == 0 ? 0.0 : solver::kInf);

  std::vector<int> balance(nn);
  for (int n = 0; n < nn; ++n) {
    std::vector<std::pair<int, double>> terms;
    for (int i = 0; i < ng; ++i)
      if (sys.generators[i].node == n) terms.emplace_back(p[i], 1.0);
    for (int j = 0; j < nj; ++j)
      if (sys.wind[j].node == n) terms.emplace_back(w[j], 1.0);
    for (int l = 0; l < nl; ++l) {
      if (sys.lines[l].to == n) terms.emplace_back(f[l], 1.0);
      if (sys.lines[l].from == n) terms.emplace_back(f[l], -1.0);
    }
    balance[n] = lp.add_constraint("bal[" + sys.nodes[n].name + "]", terms, Sense::Equal,
                                   sys.nodes[n].demand);
  }
  for (int l = 0; l < nl; ++l) {
    const auto& line = sys.lines[l];
    lp.add_constraint("flow[" + line.name + "]",
                      {{f[l], 1.0},
                       {th[line.from], -line.susceptance},
                       {th[line.to], line.susceptance}},
                      Sense::Equal, 0.0);
  }

  Solution sol = solve_lp(lp);
  if (sol.status == Status::Infeasible)
    throw MarketError("day-ahead: infeasible (check network connectivity and balance)");
  require_optimal(sol, "day-ahead");

  DayAheadOutcome out;
  out.cost = sol.objective;
  out.p.resize(ng);
  out.w.resize(nj);
  out.flow.resize(nl);
  out.angle.resize(nn);
  out.price.resize(nn);
  for (int i = 0; i < ng; ++i) out.p[i] = sol.x[p[i]];
  for (int j = 0; j < nj; ++j) out.w[j] = sol.x[w[j]];
  for (int l = 0; l < nl; ++l) out.flow[l] = sol.x[f[l]];
  out.flow_rent.assign(nl, 0.0);
  for (int l = 0; l < nl; ++l) out.flow_rent[l] = -out.flow[l] * sol.reduced_cost[f[l]];
  for (int n = 0; n < nn; ++n) {
    out.angle[n] = sol.x[th[n]];
    out.price[n] = sol.dual[balance[n]];
  }
  return out;
}

BalancingOutcome clear_balancing(const SystemData& sys, const TransmissionShares& shares,
                                 const DayAheadOutcome& day_ahead,
                                 const ReserveOutcome& reserve, int scenario,
                                 Coalition coalition) {
  const int ng = static_cast<int>(sys.generators.size());
  const int nj = static_cast<int>(sys.wind.size());
  const int nn = static_cast<int>(sys.nodes.size());
  const int nl = static_cast<int>(sys.lines.size());
  const Scenario& sc = sys.scenarios.at(scenario);

  std::vector<bool> frozen(nl, false);
  for (int e : frozen_links(sys, shares, coalition))
    for (int l : sys.links[e].lines) frozen[l] = true;

  LinearProgram lp;
  std::vector<int> up(ng), dn(ng), sh(nn), sp(nj), f(nl), th(nn);
  for (int i = 0; i < ng; ++i) {
    const auto& g = sys.generators[i];
    up[i] = lp.add_variable("up[" + g.name + "]", 0.0, reserve.r_up.at(i), g.energy_offer);
    dn[i] = lp.add_variable("dn[" + g.name + "]", 0.0, reserve.r_down.at(i), -g.energy_offer);
  }
  for (int n = 0; n < nn; ++n)
    sh[n] = lp.add_variable("shed[" + sys.nodes[n].name + "]", 0.0, sys.nodes[n].demand,
                            sys.shed_cost);
  for (int j = 0; j < nj; ++j)
    sp[j] = lp.add_variable("spill[" + sys.wind[j].name + "]", 0.0, sc.wind.at(j), 0.0);
  for (int l = 0; l < nl; ++l) {
    double lo = frozen[l] ? day_ahead.flow.at(l) : -sys.lines[l].capacity;
    double hi = frozen[l] ? day_ahead.flow.at(l) : sys.lines[l].capacity;
    f[l] = lp.add_variable("f[" + sys.lines[l].name + "]", lo, hi, 0.0);
  }
  for (int n = 0; n < nn; ++n)
    th[n] = lp.add_variable("th[" + sys.nodes[n].name + "]",
                            n == 0 ? 0.0 : -solver::kInf, n == 0 ? 0.0 : solver::kInf);

  std::vector<int> balance(nn);
  for (int n = 0; n < nn; ++n) {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
    for (int i = 0; i < ng; ++i)
      if (sys.generators[i].node == n) {
        terms.emplace_back(up[i], 1.0);
        terms.emplace_back(dn[i], -1.0);
      }
    terms.emplace_back(sh[n], 1.0);
    for (int j = 0; j < nj; ++j)
      if (sys.wind[j].node == n) {
        rhs -= sc.wind[j] - day_ahead.w.at(j);
        terms.emplace_back(sp[j], -1.0);
      }
    for (int l = 0; l < nl; ++l) {
      if (sys.lines[l].to == n) {
        terms.emplace_back(f[l], 1.0);
        rhs += day_ahead.flow[l];
      }
      if (sys.lines[l].from == n) {
        terms.emplace_back(f[l], -1.0);
        rhs -= day_ahead.flow[l];
      }
    }
    balance[n] = lp.add_constraint("bal[" + sys.nodes[n].name + "]", terms, Sense::Equal, rhs);
  }
  for (int l = 0; l < nl; ++l) {
    const auto& line = sys.lines[l];
    lp.add_constraint("flow[" + line.name + "]",
                      {{f[l], 1.0},
                       {th[line.from], -line.susceptance},
                       {th[line.to], line.susceptance}},
                      Sense::Equal, 0.0);
  }

  Solution sol = solve_lp(lp);
  require_optimal(sol, "balancing[" + sc.name + "]");

  BalancingOutcome out;
  out.cost = sol.objective;
  out.up.resize(ng);
  out.down.resize(ng);
  out.shed.resize(nn);
  out.spill.resize(nj);
  out.flow.resize(nl);
  out.price.resize(nn);
  for (int i = 0; i < ng; ++i) {
    out.up[i] = sol.x[up[i]];
    out.down[i] = sol.x[dn[i]];
  }
  for (int n = 0; n < nn; ++n) {
    out.shed[n] = sol.x[sh[n]];
    out.price[n] = sol.dual[balance[n]];
  }
  for (int j = 0; j < nj; ++j) out.spill[j] = sol.x[sp[j]];
  for (int l = 0; l < nl; ++l) out.flow[l] = sol.x[f[l]];
  out.flow_rent.assign(nl, 0.0);
  out.frozen.assign(frozen.begin(), frozen.end());
  for (int l = 0; l < nl; ++l) {
    if (frozen[l]) continue;  // fixing duals are not capacity rents
    out.flow_rent[l] = -(out.flow[l] - day_ahead.flow.at(l)) * sol.reduced_cost[f[l]];
  }
  return out;
}

ClearingOutcome run_sequential(const SystemData& sys, const TransmissionShares& shares,
                               Coalition coalition) {
  ClearingOutcome out;
  out.reserve = clear_reserve(sys, shares);
  out.day_ahead = clear_day_ahead(sys, shares, out.reserve);
  out.balancing.reserve(sys.scenarios.size());
  for (int s = 0; s < static_cast<int>(sys.scenarios.size()); ++s)
    out.balancing.push_back(
        clear_balancing(sys, shares, out.day_ahead, out.reserve, s, coalition));
  return out;
}

}  // namespace gridmech::markets
