#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "gridmech/preemptive/preemptive.hpp"

namespace gridmech::preemptive {

using markets::ClearingOutcome;
using markets::Coalition;
using markets::SystemData;
using markets::TransmissionShares;
using solver::Options;
using solver::Solution;
using solver::Status;

namespace {

PreemptiveResult sequential_result(const PreemptiveInstance& inst,
                                   const TransmissionShares& shares) {
  PreemptiveResult res;
  res.coalition = inst.coalition;
  res.shares = shares;
  res.outcome = markets::run_sequential(inst.sys, shares, inst.coalition);
  res.expected_cost = res.outcome.expected_total(inst.sys);
  return res;
}

double try_expected_cost(const PreemptiveInstance& inst, const TransmissionShares& shares) {
  try {
    return markets::run_sequential(inst.sys, shares, inst.coalition)
        .expected_total(inst.sys);
  } catch (const markets::MarketError&) {
    return solver::kInf;
  }
}

// Coordinate grid with local refinement over the free shares; seeds the
// branch-and-bound cutoff and provides the fallback incumbent.
TransmissionShares grid_incumbent(const PreemptiveInstance& inst,
                                  const std::vector<int>& free_links, double* best_cost) {
  TransmissionShares best = inst.baseline;
  *best_cost = try_expected_cost(inst, best);
  const int d = static_cast<int>(free_links.size());

  double step = d <= 2 ? 0.1 : 0.25;
  std::vector<double> center(d, 0.5);
  bool first = true;
  for (int round = 0; round < 6; ++round) {
    std::vector<std::vector<double>> levels(d);
    for (int i = 0; i < d; ++i) {
      if (first) {
        for (double v = 0.0; v <= 1.0 + 1e-9; v += step) levels[i].push_back(v);
      } else {
        for (int o = -2; o <= 2; ++o) {
          double v = center[i] + o * step;
          if (v >= -1e-9 && v <= 1.0 + 1e-9) levels[i].push_back(std::clamp(v, 0.0, 1.0));
        }
      }
    }
    std::vector<size_t> idx(d, 0);
    while (true) {
      TransmissionShares cand = best;
      for (int i = 0; i < d; ++i) cand.chi[free_links[i]] = levels[i][idx[i]];
      double cost = try_expected_cost(inst, cand);
      if (cost < *best_cost - 1e-10) {
        *best_cost = cost;
        best = cand;
      }
      int carry = 0;
      while (carry < d && ++idx[carry] == levels[carry].size()) {
        idx[carry] = 0;
        ++carry;
      }
      if (carry == d) break;
    }
    for (int i = 0; i < d; ++i) center[i] = best.chi[free_links[i]];
    step /= 2.0;
    first = false;
  }
  return best;
}

void verify_embedded(const PreemptiveInstance& inst, const TransmissionShares& shares,
                     const ClearingOutcome& embedded, double scale) {
  const double tol = 1e-5 * (1.0 + scale);
  markets::ReserveOutcome res = markets::clear_reserve(inst.sys, shares);
  if (std::abs(res.cost - embedded.reserve.cost) > tol)
    throw PreemptiveError("verification: embedded reserve cost " +
                          std::to_string(embedded.reserve.cost) +
                          " is not reserve-market optimal (" + std::to_string(res.cost) +
                          ")");
  markets::DayAheadOutcome da = markets::clear_day_ahead(inst.sys, shares, embedded.reserve);
  if (std::abs(da.cost - embedded.day_ahead.cost) > tol)
    throw PreemptiveError("verification: embedded day-ahead cost " +
                          std::to_string(embedded.day_ahead.cost) +
                          " is not day-ahead optimal (" + std::to_string(da.cost) + ")");
}

}  // namespace

double sequential_expected_cost(const PreemptiveInstance& instance) {
  PreemptiveInstance base = instance;
  base.coalition = 0;
  return markets::run_sequential(base.sys, base.baseline, 0).expected_total(base.sys);
}

PreemptiveResult solve_preemptive(const PreemptiveInstance& instance, const Options& opts) {
  const SystemData& sys = instance.sys;
  sys.validate();
  instance.baseline.validate(sys);
  if (sys.scenarios.empty())
    throw PreemptiveError("solve_preemptive: a finite scenario set is required");

  std::vector<int> free_links = markets::links_within(sys, instance.coalition);
  if (std::popcount(instance.coalition) <= 1 || free_links.empty())
    return sequential_result(instance, instance.baseline);
  std::vector<int> frozen = markets::frozen_links(sys, instance.baseline, instance.coalition);

  double grid_cost = 0.0;
  TransmissionShares grid_shares = grid_incumbent(instance, free_links, &grid_cost);

  KktSystem kkt = build_kkt(sys, instance.baseline, free_links, frozen);
  Options milp_opts = opts;
  milp_opts.cutoff = grid_cost;
  Solution sol = solve_milp(kkt.mip, milp_opts);
  if (sol.status != Status::Optimal && sol.status != Status::NodeLimit)
    throw PreemptiveError("solve_preemptive: solver returned " +
                          std::string(solver::status_name(sol.status)));

  PreemptiveResult res;
  res.coalition = instance.coalition;
  res.gap = sol.gap;
  res.nodes = sol.nodes;

  if (sol.x.empty() || sol.objective >= grid_cost - 1e-9) {
    // The seeded incumbent is optimal within the proven gap.
    res = sequential_result(instance, grid_shares);
    res.gap = sol.gap;
    res.nodes = sol.nodes;
    return res;
  }

  // Extract the embedded stage solutions from the incumbent.
  const auto val = [&](int v) { return sol.x[v]; };
  res.shares = instance.baseline;
  for (int e : free_links)
    res.shares.chi[e] = std::clamp(val(kkt.chi[e]), 0.0, 1.0);

  const int ng = static_cast<int>(sys.generators.size());
  const int nj = static_cast<int>(sys.wind.size());
  const int nn = static_cast<int>(sys.nodes.size());
  const int nl = static_cast<int>(sys.lines.size());
  ClearingOutcome& out = res.outcome;
  out.reserve.r_up.resize(ng);
  out.reserve.r_down.resize(ng);
  out.reserve.cost = 0.0;
  for (int i = 0; i < ng; ++i) {
    out.reserve.r_up[i] = val(kkt.r_up[i]);
    out.reserve.r_down[i] = val(kkt.r_dn[i]);
    out.reserve.cost += sys.generators[i].res_offer_up * out.reserve.r_up[i] +
                        sys.generators[i].res_offer_down * out.reserve.r_down[i];
  }
  out.reserve.link_up.resize(sys.links.size());
  out.reserve.link_down.resize(sys.links.size());
  for (size_t e = 0; e < sys.links.size(); ++e) {
    out.reserve.link_up[e] = val(kkt.e_up[e]);
    out.reserve.link_down[e] = val(kkt.e_dn[e]);
  }
  out.day_ahead.p.resize(ng);
  out.day_ahead.w.resize(nj);
  out.day_ahead.flow.resize(nl);
  out.day_ahead.angle.resize(nn);
  out.day_ahead.cost = 0.0;
  for (int i = 0; i < ng; ++i) {
    out.day_ahead.p[i] = val(kkt.p[i]);
    out.day_ahead.cost += sys.generators[i].energy_offer * out.day_ahead.p[i];
  }
  for (int j = 0; j < nj; ++j) out.day_ahead.w[j] = val(kkt.w[j]);
  for (int l = 0; l < nl; ++l) out.day_ahead.flow[l] = val(kkt.f[l]);
  for (int n = 0; n < nn; ++n) out.day_ahead.angle[n] = val(kkt.theta[n]);

  // Mandatory post-solve verification, then balancing re-clears that also
  // produce the scenario outcomes with duals.
  verify_embedded(instance, res.shares, out, std::abs(sol.objective));
  double expected = out.reserve.cost + out.day_ahead.cost;
  for (int s = 0; s < static_cast<int>(sys.scenarios.size()); ++s) {
    markets::BalancingOutcome bal = markets::clear_balancing(
        sys, res.shares, out.day_ahead, out.reserve, s, instance.coalition);
    expected += sys.scenarios[s].probability * bal.cost;
    out.balancing.push_back(std::move(bal));
  }
  if (std::abs(expected - sol.objective) > 1e-5 * (1.0 + std::abs(sol.objective)))
    throw PreemptiveError(
        "verification: re-cleared balancing differs from the incumbent objective by " +
        std::to_string(expected - sol.objective));
  res.expected_cost = expected;
  return res;
}

ViolationOutcome solve_violation(const PreemptiveInstance& instance,
                                 const std::vector<double>& beta, const Options& opts) {
  const SystemData& sys = instance.sys;
  const int na = sys.num_areas();
  if (static_cast<int>(beta.size()) != na)
    throw PreemptiveError("solve_violation: one activation fee per area expected");

  std::vector<int> all_links(sys.links.size());
  for (size_t e = 0; e < all_links.size(); ++e) all_links[e] = static_cast<int>(e);
  KktSystem kkt = build_kkt(sys, instance.baseline, all_links, {});
  auto& lp = kkt.mip.lp;

  std::vector<int> b(na);
  for (int a = 0; a < na; ++a) {
    b[a] = lp.add_variable("b[" + sys.areas[a] + "]", 0.0, 1.0, beta[a]);
    kkt.mip.mark_binary(b[a]);
  }

  for (size_t e = 0; e < sys.links.size(); ++e) {
    const auto& link = sys.links[e];
    double chi0 = instance.baseline.chi[e];
    for (int endpoint : {link.from_area, link.to_area}) {
      // (1 - b) chi0 <= chi' <= (1 - b) chi0 + b
      lp.add_constraint("gate_hi[" + link.name + "," + sys.areas[endpoint] + "]",
                        {{kkt.chi[e], 1.0}, {b[endpoint], chi0 - 1.0}}, solver::Sense::LessEqual,
                        chi0);
      lp.add_constraint("gate_lo[" + link.name + "," + sys.areas[endpoint] + "]",
                        {{kkt.chi[e], 1.0}, {b[endpoint], chi0}}, solver::Sense::GreaterEqual,
                        chi0);
    }
    if (chi0 == 0.0) {
      // Flow freezing across links with no existing agreement, released when
      // both end areas activate.
      for (int l : link.lines) {
        double big_m = 2.0 * sys.lines[l].capacity;
        for (int s = 0; s < static_cast<int>(sys.scenarios.size()); ++s) {
          int fs = kkt.scen[s].flow[l];
          int fd = kkt.f[l];
          for (int endpoint : {link.from_area, link.to_area}) {
            const std::string tag = "[" + sys.lines[l].name + "," +
                                    sys.scenarios[s].name + "," + sys.areas[endpoint] + "]";
            lp.add_constraint("freeze_hi" + tag,
                              {{fs, 1.0}, {fd, -1.0}, {b[endpoint], -big_m}},
                              solver::Sense::LessEqual, 0.0);
            lp.add_constraint("freeze_lo" + tag,
                              {{fs, 1.0}, {fd, -1.0}, {b[endpoint], big_m}},
                              solver::Sense::GreaterEqual, 0.0);
          }
        }
      }
    }
  }

  // All-areas-off reproduces the existing arrangements, a valid incumbent.
  double empty_cost = sequential_expected_cost(instance);
  Options milp_opts = opts;
  milp_opts.cutoff = empty_cost;

  Solution sol = solve_milp(kkt.mip, milp_opts);
  if (sol.status != Status::Optimal)
    throw PreemptiveError("solve_violation: solver returned " +
                          std::string(solver::status_name(sol.status)));

  ViolationOutcome out;
  out.gap = sol.gap;
  if (sol.x.empty()) {
    out.coalition = 0;
    out.total_with_fees = empty_cost;
    out.coalition_cost = empty_cost;
    return out;
  }
  double fees = 0.0;
  for (int a = 0; a < na; ++a)
    if (sol.x[b[a]] > 0.5) {
      out.coalition |= Coalition{1} << a;
      fees += beta[a];
    }
  out.total_with_fees = sol.objective;
  out.coalition_cost = sol.objective - fees;
  return out;
}

std::optional<PreemptiveResult> ResultsLedger::lookup(Coalition c) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != c) continue;
    PreemptiveResult res;
    res.coalition = c;
    res.expected_cost = entries_[i].second;
    res.shares.chi = chis_[i];
    return res;
  }
  return std::nullopt;
}

void ResultsLedger::record(const PreemptiveResult& result, double wall_seconds) {
  for (const auto& [mask, cost] : entries_)
    if (mask == result.coalition) return;
  entries_.emplace_back(result.coalition, result.expected_cost);
  chis_.push_back(result.shares.chi);
  std::ofstream os(path_, std::ios::app);
  nlohmann::json j;
  j["coalition"] = result.coalition;
  j["expected_cost"] = result.expected_cost;
  j["chi"] = result.shares.chi;
  j["gap"] = result.gap;
  j["wall_seconds"] = wall_seconds;
  os << j.dump() << "\n";
}

void ResultsLedger::load() {
  std::ifstream is(path_);
  if (!is) return;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    entries_.emplace_back(j.at("coalition").get<Coalition>(),
                          j.at("expected_cost").get<double>());
    chis_.push_back(j.at("chi").get<std::vector<double>>());
  }
}

}  // namespace gridmech::preemptive
