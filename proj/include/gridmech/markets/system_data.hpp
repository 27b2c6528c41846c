#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridmech::markets {

class MarketError : public std::runtime_error {
 public:
  explicit MarketError(const std::string& what) : std::runtime_error(what) {}
};

struct Node {
  std::string name;
  int area = -1;
  double demand = 0.0;  // MW
};

struct Line {
  std::string name;
  int from = -1, to = -1;     // node indices; positive flow runs from -> to
  double susceptance = 1.0;   // p.u.
  double capacity = 0.0;      // MW
  int link = -1;              // inter-area link membership, -1 for intra-area
};

struct Link {
  std::string name;
  int from_area = -1, to_area = -1;  // sending / receiving convention
  std::vector<int> lines;
  double capacity = 0.0;  // sum of member tie-line capacities
};

struct Generator {
  std::string name;
  int node = -1;
  double capacity = 0.0;      // MW
  double energy_offer = 0.0;  // currency/MWh
  double res_offer_up = 0.0, res_offer_down = 0.0;  // currency/MW
  double res_cap_up = 0.0, res_cap_down = 0.0;      // MW
  bool flexible = false;
};

struct WindPlant {
  std::string name;
  int node = -1;
  double expected = 0.0;  // MW
};

struct Scenario {
  std::string name;
  double probability = 0.0;
  std::vector<double> wind;  // MW per wind plant
};

/// Subset of areas as a bitmask; empty means "existing arrangements".
using Coalition = std::uint32_t;

struct SystemData {
  std::vector<std::string> areas;
  std::vector<Node> nodes;
  std::vector<Line> lines;
  std::vector<Link> links;
  std::vector<Generator> generators;
  std::vector<WindPlant> wind;
  std::vector<Scenario> scenarios;
  std::vector<double> rr_up, rr_down;  // per area
  double shed_cost = 1000.0;
  std::string currency = "EUR";

  int num_areas() const { return static_cast<int>(areas.size()); }
  int area_of_node(int n) const { return nodes.at(n).area; }

  /// Link-area incidence: +1 receiving end, -1 sending end, 0 otherwise.
  int incidence(int link, int area) const {
    const Link& e = links.at(link);
    if (e.to_area == area) return 1;
    if (e.from_area == area) return -1;
    return 0;
  }

  void validate() const;

  /// Largest positive/negative deviation of area wind from its expectation
  /// across the scenario set.
  void compute_requirements();
};

struct TransmissionShares {
  std::vector<double> chi;  // per link, in [0,1]

  static TransmissionShares zeros(const SystemData& sys) {
    return {std::vector<double>(sys.links.size(), 0.0)};
  }
  double line_share(const SystemData& sys, int line) const {
    int e = sys.lines.at(line).link;
    return e < 0 ? 0.0 : chi.at(e);
  }
  void validate(const SystemData& sys) const;
};

/// Links fully inside the coalition: both end areas are members.
std::vector<int> links_within(const SystemData& sys, Coalition coalition);

/// Links with no existing agreement (chi == 0) touching a non-member area;
/// their tie-line flows stay at day-ahead values during balancing.
std::vector<int> frozen_links(const SystemData& sys, const TransmissionShares& shares,
                              Coalition coalition);

}  // namespace gridmech::markets
