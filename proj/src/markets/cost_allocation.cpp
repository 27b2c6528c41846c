#include "gridmech/markets/cost_allocation.hpp"

namespace gridmech::markets {

namespace {

void add_line_rent(const SystemData& sys, int line, double rent,
                   std::vector<SurplusParts>& parts) {
  const Line& l = sys.lines[line];
  int a_from = sys.area_of_node(l.from);
  int a_to = sys.area_of_node(l.to);
  if (a_from == a_to) {
    parts[a_from].congestion += rent;
  } else {
    parts[a_from].congestion += 0.5 * rent;
    parts[a_to].congestion += 0.5 * rent;
  }
}

}  // namespace

CostAllocation allocate_area_costs(const SystemData& sys, const ClearingOutcome& outcome) {
  const int na = sys.num_areas();
  CostAllocation out;
  out.reserve.assign(na, {});
  out.day_ahead.assign(na, {});

  // Reserve stage: requirements buy at the zonal price, providers sell at it,
  // exchanged quantities earn the price spread (split between the end areas).
  const ReserveOutcome& res = outcome.reserve;
  if (res.price_up.empty())
    throw MarketError("allocate_area_costs: reserve duals are missing");
  for (int a = 0; a < na; ++a) {
    out.reserve[a].consumer =
        -(sys.rr_up[a] * res.price_up[a] + sys.rr_down[a] * res.price_down[a]);
    for (size_t i = 0; i < sys.generators.size(); ++i) {
      if (sys.area_of_node(sys.generators[i].node) != a) continue;
      const auto& g = sys.generators[i];
      out.reserve[a].producer += (res.price_up[a] - g.res_offer_up) * res.r_up[i] +
                                 (res.price_down[a] - g.res_offer_down) * res.r_down[i];
    }
  }
  for (size_t e = 0; e < sys.links.size(); ++e) {
    const Link& link = sys.links[e];
    double rent = res.link_up[e] * (res.price_up[link.to_area] - res.price_up[link.from_area]) +
                  res.link_down[e] *
                      (res.price_down[link.to_area] - res.price_down[link.from_area]);
    out.reserve[link.from_area].congestion += 0.5 * rent;
    out.reserve[link.to_area].congestion += 0.5 * rent;
  }

  // Day-ahead stage at nodal prices.
  const DayAheadOutcome& da = outcome.day_ahead;
  if (da.price.empty()) throw MarketError("allocate_area_costs: day-ahead duals are missing");
  for (size_t n = 0; n < sys.nodes.size(); ++n)
    out.day_ahead[sys.nodes[n].area].consumer -= da.price[n] * sys.nodes[n].demand;
  for (size_t i = 0; i < sys.generators.size(); ++i) {
    const auto& g = sys.generators[i];
    out.day_ahead[sys.area_of_node(g.node)].producer +=
        (da.price[g.node] - g.energy_offer) * da.p[i];
  }
  for (size_t j = 0; j < sys.wind.size(); ++j) {
    const auto& plant = sys.wind[j];
    out.day_ahead[sys.area_of_node(plant.node)].producer += da.price[plant.node] * da.w[j];
  }
  for (size_t l = 0; l < sys.lines.size(); ++l)
    add_line_rent(sys, static_cast<int>(l), da.flow_rent[l], out.day_ahead);

  // Balancing per scenario: deviations settle at the scenario nodal price;
  // shed load keeps its value-of-lost-load, flow deviations earn the spread.
  out.balancing.resize(outcome.balancing.size());
  for (size_t s = 0; s < outcome.balancing.size(); ++s) {
    const BalancingOutcome& bal = outcome.balancing[s];
    if (bal.price.empty())
      throw MarketError("allocate_area_costs: balancing duals are missing");
    auto& parts = out.balancing[s];
    parts.assign(na, {});
    for (size_t n = 0; n < sys.nodes.size(); ++n)
      parts[sys.nodes[n].area].consumer += (bal.price[n] - sys.shed_cost) * bal.shed[n];
    for (size_t i = 0; i < sys.generators.size(); ++i) {
      const auto& g = sys.generators[i];
      parts[sys.area_of_node(g.node)].producer +=
          (bal.price[g.node] - g.energy_offer) * (bal.up[i] - bal.down[i]);
    }
    for (size_t j = 0; j < sys.wind.size(); ++j) {
      const auto& plant = sys.wind[j];
      double deviation = sys.scenarios[s].wind[j] - da.w[j] - bal.spill[j];
      parts[sys.area_of_node(plant.node)].producer += bal.price[plant.node] * deviation;
    }
    for (size_t l = 0; l < sys.lines.size(); ++l)
      add_line_rent(sys, static_cast<int>(l), bal.flow_rent[l], parts);
  }

  out.area_cost.assign(outcome.balancing.size(), std::vector<double>(na, 0.0));
  for (size_t s = 0; s < outcome.balancing.size(); ++s)
    for (int a = 0; a < na; ++a)
      out.area_cost[s][a] =
          -(out.reserve[a].total() + out.day_ahead[a].total() + out.balancing[s][a].total());
  return out;
}

}  // namespace gridmech::markets
