#include <algorithm>
#include <cmath>

#include "gridmech/markets/system_data.hpp"

namespace gridmech::markets {

void SystemData::validate() const {
  auto fail = [](const std::string& m) { throw MarketError("system: " + m); };
  if (areas.empty()) fail("no areas");
  for (const auto& n : nodes)
    if (n.area < 0 || n.area >= num_areas()) fail("node '" + n.name + "' has no area");
  for (const auto& l : lines) {
    if (l.from < 0 || l.from >= static_cast<int>(nodes.size()) || l.to < 0 ||
        l.to >= static_cast<int>(nodes.size()))
      fail("line '" + l.name + "' references unknown nodes");
    if (l.capacity < 0 || l.susceptance <= 0)
      fail("line '" + l.name + "' needs positive susceptance and nonnegative capacity");
    bool crosses = nodes[l.from].area != nodes[l.to].area;
    if (crosses != (l.link >= 0))
      fail("line '" + l.name + "' area crossing and link membership disagree");
  }
  for (size_t e = 0; e < links.size(); ++e) {
    const Link& link = links[e];
    if (link.from_area == link.to_area) fail("link '" + link.name + "' joins an area to itself");
    double cap = 0.0;
    for (int l : link.lines) {
      if (lines.at(l).link != static_cast<int>(e))
        fail("link '" + link.name + "' membership mismatch on line " + lines.at(l).name);
      cap += lines[l].capacity;
    }
    if (std::abs(cap - link.capacity) > 1e-9)
      fail("link '" + link.name + "' capacity differs from the sum of its tie lines");
    int sum = 0;
    for (int a = 0; a < num_areas(); ++a) sum += incidence(static_cast<int>(e), a);
    if (sum != 0) fail("link '" + link.name + "' incidence does not cancel");
  }
  for (const auto& g : generators) {
    if (g.node < 0 || g.node >= static_cast<int>(nodes.size()))
      fail("generator '" + g.name + "' references an unknown node");
    if (g.capacity < 0 || g.res_cap_up < 0 || g.res_cap_down < 0)
      fail("generator '" + g.name + "' has negative capacities");
  }
  for (const auto& j : wind)
    if (j.node < 0 || j.node >= static_cast<int>(nodes.size()))
      fail("wind plant '" + j.name + "' references an unknown node");
  double ptotal = 0.0;
  for (const auto& s : scenarios) {
    if (s.probability < 0) fail("scenario '" + s.name + "' has negative probability");
    if (s.wind.size() != wind.size())
      fail("scenario '" + s.name + "' wind vector length mismatch");
    ptotal += s.probability;
  }
  if (!scenarios.empty() && std::abs(ptotal - 1.0) > 1e-9)
    fail("scenario probabilities sum to " + std::to_string(ptotal));
  if (!rr_up.empty() && (rr_up.size() != areas.size() || rr_down.size() != areas.size()))
    fail("requirement vectors must cover every area");
}

void SystemData::compute_requirements() {
  rr_up.assign(areas.size(), 0.0);
  rr_down.assign(areas.size(), 0.0);
  for (const auto& s : scenarios) {
    std::vector<double> dev(areas.size(), 0.0);
    for (size_t j = 0; j < wind.size(); ++j)
      dev[nodes[wind[j].node].area] += wind[j].expected - s.wind[j];
    for (size_t a = 0; a < areas.size(); ++a) {
      rr_up[a] = std::max(rr_up[a], dev[a]);     // shortfall covered upward
      rr_down[a] = std::max(rr_down[a], -dev[a]);
    }
  }
}

void TransmissionShares::validate(const SystemData& sys) const {
  if (chi.size() != sys.links.size())
    throw MarketError("shares: one value per link expected");
  for (size_t e = 0; e < chi.size(); ++e)
    if (chi[e] < 0.0 || chi[e] > 1.0)
      throw MarketError("shares: chi out of [0,1] on link " + sys.links[e].name);
}

std::vector<int> links_within(const SystemData& sys, Coalition coalition) {
  std::vector<int> out;
  for (size_t e = 0; e < sys.links.size(); ++e) {
    const Link& link = sys.links[e];
    bool inside = (coalition >> link.from_area & 1) && (coalition >> link.to_area & 1);
    if (inside) out.push_back(static_cast<int>(e));
  }
  return out;
}

std::vector<int> frozen_links(const SystemData& sys, const TransmissionShares& shares,
                              Coalition coalition) {
  std::vector<int> out;
  for (size_t e = 0; e < sys.links.size(); ++e) {
    if (shares.chi[e] != 0.0) continue;
    const Link& link = sys.links[e];
    bool touches_outside =
        !(coalition >> link.from_area & 1) || !(coalition >> link.to_area & 1);
    if (touches_outside) out.push_back(static_cast<int>(e));
  }
  return out;
}

}  // namespace gridmech::markets
