#include <algorithm>
#include <cmath>

#include "gridmech/preemptive/kkt.hpp"

namespace gridmech::preemptive {

using markets::SystemData;
using markets::TransmissionShares;
using solver::kInf;
using solver::LinearProgram;
using solver::LinExpr;
using solver::Sense;

KktSystem build_kkt(const SystemData& sys, const TransmissionShares& baseline,
                    const std::vector<int>& free_links, const std::vector<int>& frozen) {
  sys.validate();
  baseline.validate(sys);
  KktSystem k;
  LinearProgram& lp = k.mip.lp;
  const int ng = static_cast<int>(sys.generators.size());
  const int nj = static_cast<int>(sys.wind.size());
  const int nn = static_cast<int>(sys.nodes.size());
  const int nl = static_cast<int>(sys.lines.size());
  const int ne = static_cast<int>(sys.links.size());
  const int na = sys.num_areas();
  const int ns = static_cast<int>(sys.scenarios.size());

  double max_offer = 0.0;
  for (const auto& g : sys.generators)
    max_offer = std::max({max_offer, g.energy_offer, g.res_offer_up, g.res_offer_down});
  const double dual_cap = sys.shed_cost + max_offer;  // price-side big-M
  // Any optimal multiplier of the two lower levels is bounded well inside
  // this box; capping them removes objective-neutral dual rays.
  const double dual_box = 10.0 * dual_cap;

  // --- Variables -----------------------------------------------------------
  k.chi.resize(ne);
  for (int e = 0; e < ne; ++e) {
    bool free_share =
        std::find(free_links.begin(), free_links.end(), e) != free_links.end();
    double lo = free_share ? 0.0 : baseline.chi[e];
    double hi = free_share ? 1.0 : baseline.chi[e];
    k.chi[e] = lp.add_variable("chi[" + sys.links[e].name + "]", lo, hi);
  }

  k.r_up.resize(ng);
  k.r_dn.resize(ng);
  for (int i = 0; i < ng; ++i) {
    const auto& g = sys.generators[i];
    k.r_up[i] = lp.add_variable("r_up[" + g.name + "]", 0.0, g.res_cap_up, g.res_offer_up);
    k.r_dn[i] =
        lp.add_variable("r_dn[" + g.name + "]", 0.0, g.res_cap_down, g.res_offer_down);
  }
  k.e_up.resize(ne);
  k.e_dn.resize(ne);
  for (int e = 0; e < ne; ++e) {
    k.e_up[e] = lp.add_variable("re_up[" + sys.links[e].name + "]", -kInf, kInf);
    k.e_dn[e] = lp.add_variable("re_dn[" + sys.links[e].name + "]", -kInf, kInf);
  }
  k.mu_r_up.resize(ng);
  k.mu_r_dn.resize(ng);
  for (int i = 0; i < ng; ++i) {
    k.mu_r_up[i] = lp.add_variable("mu_r_up[" + sys.generators[i].name + "]", 0.0, dual_box);
    k.mu_r_dn[i] = lp.add_variable("mu_r_dn[" + sys.generators[i].name + "]", 0.0, dual_box);
  }
  k.mu_rr_up.resize(na);
  k.mu_rr_dn.resize(na);
  for (int a = 0; a < na; ++a) {
    k.mu_rr_up[a] = lp.add_variable("mu_rr_up[" + sys.areas[a] + "]", 0.0, dual_box);
    k.mu_rr_dn[a] = lp.add_variable("mu_rr_dn[" + sys.areas[a] + "]", 0.0, dual_box);
  }
  k.zeta_l_up.resize(ne);
  k.zeta_u_up.resize(ne);
  k.zeta_l_dn.resize(ne);
  k.zeta_u_dn.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const std::string& n = sys.links[e].name;
    k.zeta_l_up[e] = lp.add_variable("zeta_l_up[" + n + "]", 0.0, dual_box);
    k.zeta_u_up[e] = lp.add_variable("zeta_u_up[" + n + "]", 0.0, dual_box);
    k.zeta_l_dn[e] = lp.add_variable("zeta_l_dn[" + n + "]", 0.0, dual_box);
    k.zeta_u_dn[e] = lp.add_variable("zeta_u_dn[" + n + "]", 0.0, dual_box);
  }

  k.p.resize(ng);
  for (int i = 0; i < ng; ++i)
    k.p[i] = lp.add_variable("p[" + sys.generators[i].name + "]", 0.0, kInf,
                             sys.generators[i].energy_offer);
  k.w.resize(nj);
  for (int j = 0; j < nj; ++j)
    k.w[j] = lp.add_variable("w[" + sys.wind[j].name + "]", 0.0, sys.wind[j].expected);
  k.f.resize(nl);
  for (int l = 0; l < nl; ++l)
    k.f[l] = lp.add_variable("f[" + sys.lines[l].name + "]", -kInf, kInf);
  k.theta.resize(nn);
  for (int n = 0; n < nn; ++n)
    k.theta[n] = lp.add_variable("th[" + sys.nodes[n].name + "]",
                                 n == 0 ? 0.0 : -kInf, n == 0 ? 0.0 : kInf);
  k.lambda.resize(nn);
  for (int n = 0; n < nn; ++n)
    k.lambda[n] = lp.add_variable("lam[" + sys.nodes[n].name + "]", -dual_box, dual_box);
  k.mu_pl.resize(ng);
  k.mu_pu.resize(ng);
  for (int i = 0; i < ng; ++i) {
    k.mu_pl[i] = lp.add_variable("mu_pl[" + sys.generators[i].name + "]", 0.0, dual_box);
    k.mu_pu[i] = lp.add_variable("mu_pu[" + sys.generators[i].name + "]", 0.0, dual_box);
  }
  k.mu_wu.resize(nj);
  for (int j = 0; j < nj; ++j)
    k.mu_wu[j] = lp.add_variable("mu_wu[" + sys.wind[j].name + "]", 0.0, dual_box);
  k.lambda_f.resize(nl);
  k.zeta_l.resize(nl);
  k.zeta_u.resize(nl);
  for (int l = 0; l < nl; ++l) {
    const std::string& n = sys.lines[l].name;
    k.lambda_f[l] = lp.add_variable("lam_f[" + n + "]", -dual_box, dual_box);
    k.zeta_l[l] = lp.add_variable("zeta_l[" + n + "]", 0.0, dual_box);
    k.zeta_u[l] = lp.add_variable("zeta_u[" + n + "]", 0.0, dual_box);
  }

  k.scen.resize(ns);
  for (int s = 0; s < ns; ++s) {
    const auto& sc = sys.scenarios[s];
    auto& v = k.scen[s];
    double pi = sc.probability;
    v.up.resize(ng);
    v.dn.resize(ng);
    for (int i = 0; i < ng; ++i) {
      const auto& g = sys.generators[i];
      v.up[i] = lp.add_variable("up[" + g.name + "," + sc.name + "]", 0.0, kInf,
                                pi * g.energy_offer);
      v.dn[i] = lp.add_variable("dn[" + g.name + "," + sc.name + "]", 0.0, kInf,
                                -pi * g.energy_offer);
    }
    v.shed.resize(nn);
    for (int n = 0; n < nn; ++n)
      v.shed[n] = lp.add_variable("shed[" + sys.nodes[n].name + "," + sc.name + "]", 0.0,
                                  sys.nodes[n].demand, pi * sys.shed_cost);
    v.spill.resize(nj);
    for (int j = 0; j < nj; ++j)
      v.spill[j] = lp.add_variable("spill[" + sys.wind[j].name + "," + sc.name + "]", 0.0,
                                   sc.wind[j]);
    v.flow.resize(nl);
    for (int l = 0; l < nl; ++l)
      v.flow[l] = lp.add_variable("fs[" + sys.lines[l].name + "," + sc.name + "]",
                                  -sys.lines[l].capacity, sys.lines[l].capacity);
    v.angle.resize(nn);
    for (int n = 0; n < nn; ++n)
      v.angle[n] = lp.add_variable("ths[" + sys.nodes[n].name + "," + sc.name + "]",
                                   n == 0 ? 0.0 : -kInf, n == 0 ? 0.0 : kInf);
  }

  // --- Reserve stage: feasibility, stationarity, complementarity -----------
  auto pair_bigm = [&](const std::string& name, LinExpr a, LinExpr b, double ma,
                       double mb) {
    k.mip.add_complementarity(name, std::move(a), std::move(b), ma, mb);
  };
  double total_link_cap = 0.0;
  for (const auto& link : sys.links) total_link_cap += link.capacity;

  for (int a = 0; a < na; ++a) {
    for (int dir = 0; dir < 2; ++dir) {
      bool up = dir == 0;
      LinExpr surplus;
      double supply_cap = 0.0;
      for (int i = 0; i < ng; ++i) {
        if (sys.area_of_node(sys.generators[i].node) != a) continue;
        surplus.add(up ? k.r_up[i] : k.r_dn[i], 1.0);
        supply_cap += up ? sys.generators[i].res_cap_up : sys.generators[i].res_cap_down;
      }
      for (int e = 0; e < ne; ++e) {
        int h = sys.incidence(e, a);
        if (h != 0) surplus.add(up ? k.e_up[e] : k.e_dn[e], h);
      }
      surplus.constant = -(up ? sys.rr_up[a] : sys.rr_down[a]);
      lp.add_constraint((up ? "rr_up[" : "rr_dn[") + sys.areas[a] + "]", surplus.terms,
                        Sense::GreaterEqual, -surplus.constant);
      LinExpr mu{{{up ? k.mu_rr_up[a] : k.mu_rr_dn[a], 1.0}}};
      pair_bigm((up ? "c_rr_up[" : "c_rr_dn[") + sys.areas[a] + "]", surplus, mu,
                supply_cap + total_link_cap, dual_cap);
      ++k.reserve_pairs;
    }
  }
  for (int i = 0; i < ng; ++i) {
    const auto& g = sys.generators[i];
    if (g.res_cap_up <= 0.0 && g.res_cap_down <= 0.0) continue;  // cannot offer
    int area = sys.area_of_node(g.node);
    for (int dir = 0; dir < 2; ++dir) {
      bool up = dir == 0;
      double cap = up ? g.res_cap_up : g.res_cap_down;
      if (cap <= 0.0) continue;
      int r = up ? k.r_up[i] : k.r_dn[i];
      int mu = up ? k.mu_r_up[i] : k.mu_r_dn[i];
      // 0 <= R - r  perp  mu_r >= 0
      pair_bigm((up ? "c_rcap_up[" : "c_rcap_dn[") + g.name + "]",
                LinExpr{{{r, -1.0}}, cap}, LinExpr{{{mu, 1.0}}}, cap, dual_cap);
      ++k.reserve_pairs;
      // 0 <= C +/- mu_r - mu_rr  perp  r >= 0
      LinExpr stat{{{mu, 1.0}, {up ? k.mu_rr_up[area] : k.mu_rr_dn[area], -1.0}},
                   up ? g.res_offer_up : g.res_offer_down};
      lp.add_constraint((up ? "stat_r_up[" : "stat_r_dn[") + g.name + "]", stat.terms,
                        Sense::GreaterEqual, -stat.constant);
      pair_bigm((up ? "c_statr_up[" : "c_statr_dn[") + g.name + "]", stat,
                LinExpr{{{r, 1.0}}}, max_offer + dual_cap, cap);
      ++k.reserve_pairs;
    }
  }
  for (int e = 0; e < ne; ++e) {
    const auto& link = sys.links[e];
    double cap = link.capacity;
    for (int dir = 0; dir < 2; ++dir) {
      bool up = dir == 0;
      int re = up ? k.e_up[e] : k.e_dn[e];
      int zl = up ? k.zeta_l_up[e] : k.zeta_l_dn[e];
      int zu = up ? k.zeta_u_up[e] : k.zeta_u_dn[e];
      std::string tag = (up ? "up[" : "dn[") + link.name + "]";
      // 0 <= r_e + chi T  perp  zeta_l ; 0 <= chi T - r_e  perp  zeta_u
      LinExpr lo{{{re, 1.0}, {k.chi[e], cap}}};
      LinExpr hi{{{re, -1.0}, {k.chi[e], cap}}};
      lp.add_constraint("link_lo_" + tag, lo.terms, Sense::GreaterEqual, 0.0);
      lp.add_constraint("link_hi_" + tag, hi.terms, Sense::GreaterEqual, 0.0);
      pair_bigm("c_link_lo_" + tag, lo, LinExpr{{{zl, 1.0}}}, 2.0 * cap, dual_cap);
      pair_bigm("c_link_hi_" + tag, hi, LinExpr{{{zu, 1.0}}}, 2.0 * cap, dual_cap);
      k.reserve_pairs += 2;
      // Stationarity of the exchange variable (free): equality.
      LinExpr stat{{{zl, 1.0}, {zu, -1.0}}};
      for (int a = 0; a < na; ++a) {
        int h = sys.incidence(e, a);
        if (h != 0) stat.add(up ? k.mu_rr_up[a] : k.mu_rr_dn[a], h);
      }
      lp.add_constraint("stat_re_" + tag, stat.terms, Sense::Equal, 0.0);
    }
  }

  // --- Day-ahead stage ------------------------------------------------------
  for (int n = 0; n < nn; ++n) {
    LinExpr bal;
    for (int i = 0; i < ng; ++i)
      if (sys.generators[i].node == n) bal.add(k.p[i], 1.0);
    for (int j = 0; j < nj; ++j)
      if (sys.wind[j].node == n) bal.add(k.w[j], 1.0);
    for (int l = 0; l < nl; ++l) {
      if (sys.lines[l].to == n) bal.add(k.f[l], 1.0);
      if (sys.lines[l].from == n) bal.add(k.f[l], -1.0);
    }
    lp.add_constraint("da_bal[" + sys.nodes[n].name + "]", bal.terms, Sense::Equal,
                      sys.nodes[n].demand);
  }
  for (int l = 0; l < nl; ++l) {
    const auto& line = sys.lines[l];
    lp.add_constraint("da_flow[" + line.name + "]",
                      {{k.f[l], 1.0},
                       {k.theta[line.from], -line.susceptance},
                       {k.theta[line.to], line.susceptance}},
                      Sense::Equal, 0.0);
  }
  for (int i = 0; i < ng; ++i) {
    const auto& g = sys.generators[i];
    // r_dn <= p <= P - r_up (windows with reserve variables inside).
    LinExpr lo{{{k.p[i], 1.0}, {k.r_dn[i], -1.0}}};
    LinExpr hi{{{k.p[i], -1.0}, {k.r_up[i], -1.0}}, g.capacity};
    lp.add_constraint("p_lo[" + g.name + "]", lo.terms, Sense::GreaterEqual, 0.0);
    lp.add_constraint("p_hi[" + g.name + "]", hi.terms, Sense::GreaterEqual, -hi.constant);
    pair_bigm("c_p_lo[" + g.name + "]", lo, LinExpr{{{k.mu_pl[i], 1.0}}}, g.capacity,
              dual_cap);
    pair_bigm("c_p_hi[" + g.name + "]", hi, LinExpr{{{k.mu_pu[i], 1.0}}}, g.capacity,
              dual_cap);
    k.day_ahead_pairs += 2;
    // Stationarity (p free within the window): C - lambda - mu_pl + mu_pu = 0.
    lp.add_constraint("stat_p[" + g.name + "]",
                      {{k.lambda[g.node], -1.0}, {k.mu_pl[i], -1.0}, {k.mu_pu[i], 1.0}},
                      Sense::Equal, -g.energy_offer);
  }
  for (int j = 0; j < nj; ++j) {
    const auto& plant = sys.wind[j];
    // 0 <= Wbar - w  perp  mu_wu
    LinExpr room{{{k.w[j], -1.0}}, plant.expected};
    pair_bigm("c_w_hi[" + plant.name + "]", room, LinExpr{{{k.mu_wu[j], 1.0}}},
              plant.expected, dual_cap);
    // 0 <= mu_wu - lambda  perp  w >= 0
    LinExpr stat{{{k.mu_wu[j], 1.0}, {k.lambda[plant.node], -1.0}}};
    lp.add_constraint("stat_w[" + plant.name + "]", stat.terms, Sense::GreaterEqual, 0.0);
    pair_bigm("c_stat_w[" + plant.name + "]", stat, LinExpr{{{k.w[j], 1.0}}},
              2.0 * dual_cap, plant.expected);
    k.day_ahead_pairs += 2;
  }
  for (int l = 0; l < nl; ++l) {
    const auto& line = sys.lines[l];
    double cap = line.capacity;
    // Available day-ahead capacity (1 - chi) T, with chi of the parent link.
    LinExpr lo{{{k.f[l], 1.0}}, cap};
    LinExpr hi{{{k.f[l], -1.0}}, cap};
    if (line.link >= 0) {
      lo.add(k.chi[line.link], -cap);
      hi.add(k.chi[line.link], -cap);
    }
    lp.add_constraint("f_lo[" + line.name + "]", lo.terms, Sense::GreaterEqual,
                      -lo.constant);
    lp.add_constraint("f_hi[" + line.name + "]", hi.terms, Sense::GreaterEqual,
                      -hi.constant);
    pair_bigm("c_f_lo[" + line.name + "]", lo, LinExpr{{{k.zeta_l[l], 1.0}}}, 2.0 * cap,
              dual_cap);
    pair_bigm("c_f_hi[" + line.name + "]", hi, LinExpr{{{k.zeta_u[l], 1.0}}}, 2.0 * cap,
              dual_cap);
    k.day_ahead_pairs += 2;
    // Stationarity of f (free): sum_n A lambda + lambda_f - zeta_l + zeta_u = 0
    LinExpr stat{{{k.lambda_f[l], 1.0}, {k.zeta_l[l], -1.0}, {k.zeta_u[l], 1.0}}};
    stat.add(k.lambda[line.from], 1.0);
    stat.add(k.lambda[line.to], -1.0);
    lp.add_constraint("stat_f[" + line.name + "]", stat.terms, Sense::Equal, 0.0);
  }
  // Stationarity of the angles (reference node's row only pins the free
  // reference multiplier, so it is omitted).
  for (int n = 1; n < nn; ++n) {
    LinExpr stat;
    for (int l = 0; l < nl; ++l) {
      const auto& line = sys.lines[l];
      if (line.from == n) stat.add(k.lambda_f[l], -line.susceptance);
      if (line.to == n) stat.add(k.lambda_f[l], line.susceptance);
    }
    lp.add_constraint("stat_th[" + sys.nodes[n].name + "]", stat.terms, Sense::Equal, 0.0);
  }

  // --- Balancing stage, primal only ------------------------------------------
  for (int s = 0; s < ns; ++s) {
    const auto& sc = sys.scenarios[s];
    const auto& v = k.scen[s];
    for (int n = 0; n < nn; ++n) {
      LinExpr bal;
      double rhs = 0.0;
      for (int i = 0; i < ng; ++i)
        if (sys.generators[i].node == n) {
          bal.add(v.up[i], 1.0);
          bal.add(v.dn[i], -1.0);
        }
      bal.add(v.shed[n], 1.0);
      for (int j = 0; j < nj; ++j)
        if (sys.wind[j].node == n) {
          bal.add(v.spill[j], -1.0);
          bal.add(k.w[j], -1.0);  // deviation W_s - w enters through w
          rhs += sc.wind[j];
        }
      for (int l = 0; l < nl; ++l) {
        if (sys.lines[l].to == n) {
          bal.add(v.flow[l], 1.0);
          bal.add(k.f[l], -1.0);
        }
        if (sys.lines[l].from == n) {
          bal.add(v.flow[l], -1.0);
          bal.add(k.f[l], 1.0);
        }
      }
      // up - dn + shed + (W_s - w - spill) + inflow(fs) - inflow(f) = 0
      lp.add_constraint("bal[" + sys.nodes[n].name + "," + sc.name + "]", bal.terms,
                        Sense::Equal, -rhs + 0.0);
    }
    for (int i = 0; i < ng; ++i) {
      lp.add_constraint("up_cap[" + sys.generators[i].name + "," + sc.name + "]",
                        {{v.up[i], 1.0}, {k.r_up[i], -1.0}}, Sense::LessEqual, 0.0);
      lp.add_constraint("dn_cap[" + sys.generators[i].name + "," + sc.name + "]",
                        {{v.dn[i], 1.0}, {k.r_dn[i], -1.0}}, Sense::LessEqual, 0.0);
    }
    for (int l = 0; l < nl; ++l) {
      const auto& line = sys.lines[l];
      lp.add_constraint("fs_def[" + line.name + "," + sc.name + "]",
                        {{v.flow[l], 1.0},
                         {v.angle[line.from], -line.susceptance},
                         {v.angle[line.to], line.susceptance}},
                        Sense::Equal, 0.0);
    }
    for (int e : frozen)
      for (int l : sys.links[e].lines)
        lp.add_constraint("freeze[" + sys.lines[l].name + "," + sc.name + "]",
                          {{v.flow[l], 1.0}, {k.f[l], -1.0}}, Sense::Equal, 0.0);
  }

  return k;
}

}  // namespace gridmech::preemptive
