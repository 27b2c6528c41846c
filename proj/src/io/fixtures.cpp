#include <fstream>
#include <set>

#include "gridmech/io/fixtures.hpp"

namespace gridmech::io {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw FixtureError(where + ": unknown field '" + it.key() + "'");
}

void check_schema(const json& obj, const std::string& tag, const std::string& path) {
  if (!obj.is_object() || !obj.contains("schema") || obj["schema"] != tag)
    throw FixtureError(path + ": expected schema tag '" + tag + "'");
}

double number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw FixtureError(where + ": missing field '" + key + "'");
  if (!obj[key].is_number()) throw FixtureError(where + ": field '" + key + "' must be a number");
  return obj[key].get<double>();
}

std::string text(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_string())
    throw FixtureError(where + ": missing string field '" + key + "'");
  return obj[key].get<std::string>();
}

int index_of(const std::vector<std::string>& names, const std::string& name,
             const std::string& what) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw FixtureError("unknown " + what + " '" + name + "'");
}

}  // namespace

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FixtureError("cannot open '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw FixtureError(path + ": " + e.what());
  }
  return j;
}

markets::SystemData load_system(const std::string& path) {
  json j = read_json(path);
  check_schema(j, "gridmech/system-v1", path);
  check_keys(j, path,
             {"schema", "currency", "shed_cost", "areas", "nodes", "lines", "links",
              "generators", "wind", "requirements"});

  markets::SystemData sys;
  if (j.contains("currency")) sys.currency = j["currency"].get<std::string>();
  if (j.contains("shed_cost")) sys.shed_cost = number(j, path, "shed_cost");
  for (const auto& a : j.at("areas")) sys.areas.push_back(a.get<std::string>());

  std::vector<std::string> node_names, line_names;
  for (const auto& n : j.at("nodes")) {
    check_keys(n, "node", {"name", "area", "demand"});
    markets::Node node;
    node.name = text(n, "node", "name");
    node.area = index_of(sys.areas, text(n, "node", "area"), "area");
    node.demand = n.contains("demand") ? number(n, node.name, "demand") : 0.0;
    node_names.push_back(node.name);
    sys.nodes.push_back(node);
  }
  for (const auto& l : j.at("lines")) {
    check_keys(l, "line", {"name", "from", "to", "capacity", "susceptance", "reactance"});
    markets::Line line;
    line.name = text(l, "line", "name");
    line.from = index_of(node_names, text(l, "line", "from"), "node");
    line.to = index_of(node_names, text(l, "line", "to"), "node");
    line.capacity = number(l, line.name, "capacity");
    if (l.contains("susceptance"))
      line.susceptance = number(l, line.name, "susceptance");
    else
      line.susceptance = 1.0 / number(l, line.name, "reactance");
    line_names.push_back(line.name);
    sys.lines.push_back(line);
  }
  if (j.contains("links")) {
    for (const auto& e : j["links"]) {
      check_keys(e, "link", {"name", "from_area", "to_area", "lines"});
      markets::Link link;
      link.name = text(e, "link", "name");
      link.from_area = index_of(sys.areas, text(e, "link", "from_area"), "area");
      link.to_area = index_of(sys.areas, text(e, "link", "to_area"), "area");
      for (const auto& ln : e.at("lines")) {
        int l = index_of(line_names, ln.get<std::string>(), "line");
        link.lines.push_back(l);
        link.capacity += sys.lines[l].capacity;
        sys.lines[l].link = static_cast<int>(sys.links.size());
      }
      sys.links.push_back(link);
    }
  }
  for (const auto& g : j.at("generators")) {
    check_keys(g, "generator",
               {"name", "node", "capacity", "energy_offer", "flexible", "reserve_offer_up",
                "reserve_offer_down", "reserve_cap_up", "reserve_cap_down"});
    markets::Generator gen;
    gen.name = text(g, "generator", "name");
    gen.node = index_of(node_names, text(g, "generator", "node"), "node");
    gen.capacity = number(g, gen.name, "capacity");
    gen.energy_offer = number(g, gen.name, "energy_offer");
    gen.flexible = g.contains("flexible") && g["flexible"].get<bool>();
    if (gen.flexible) {
      gen.res_offer_up = number(g, gen.name, "reserve_offer_up");
      gen.res_offer_down = number(g, gen.name, "reserve_offer_down");
      gen.res_cap_up = number(g, gen.name, "reserve_cap_up");
      gen.res_cap_down = number(g, gen.name, "reserve_cap_down");
    } else if (g.contains("reserve_cap_up") || g.contains("reserve_cap_down")) {
      throw FixtureError("generator '" + gen.name + "': reserve caps on an inflexible unit");
    }
    sys.generators.push_back(gen);
  }
  if (j.contains("wind")) {
    for (const auto& w : j["wind"]) {
      check_keys(w, "wind", {"name", "node", "expected"});
      markets::WindPlant plant;
      plant.name = text(w, "wind", "name");
      plant.node = index_of(node_names, text(w, "wind", "node"), "node");
      plant.expected = number(w, plant.name, "expected");
      sys.wind.push_back(plant);
    }
  }
  if (j.contains("requirements")) {
    sys.rr_up.assign(sys.areas.size(), 0.0);
    sys.rr_down.assign(sys.areas.size(), 0.0);
    for (auto it = j["requirements"].begin(); it != j["requirements"].end(); ++it) {
      int a = index_of(sys.areas, it.key(), "area");
      check_keys(it.value(), "requirement", {"up", "down"});
      sys.rr_up[a] = number(it.value(), it.key(), "up");
      sys.rr_down[a] = number(it.value(), it.key(), "down");
    }
  }
  return sys;
}

void load_scenarios(const std::string& path, markets::SystemData& sys) {
  json j = read_json(path);
  check_schema(j, "gridmech/scenarios-v1", path);
  check_keys(j, path, {"schema", "scenarios"});
  if (!j.contains("scenarios") || j["scenarios"].empty())
    throw FixtureError(path + ": field 'scenarios' must list at least one scenario");
  sys.scenarios.clear();
  std::vector<std::string> wind_names;
  for (const auto& w : sys.wind) wind_names.push_back(w.name);
  for (const auto& s : j["scenarios"]) {
    check_keys(s, "scenario", {"name", "probability", "wind"});
    markets::Scenario sc;
    sc.name = text(s, "scenario", "name");
    sc.probability = number(s, sc.name, "probability");
    sc.wind.assign(sys.wind.size(), 0.0);
    if (!s.contains("wind")) throw FixtureError("scenario '" + sc.name + "': missing field 'wind'");
    for (auto it = s["wind"].begin(); it != s["wind"].end(); ++it) {
      int idx = index_of(wind_names, it.key(), "wind plant");
      sc.wind[idx] = it.value().get<double>();
    }
    sys.scenarios.push_back(sc);
  }
  if (sys.rr_up.empty()) sys.compute_requirements();
}

markets::TransmissionShares load_shares(const std::string& path,
                                        const markets::SystemData& sys) {
  json j = read_json(path);
  check_schema(j, "gridmech/shares-v1", path);
  check_keys(j, path, {"schema", "chi"});
  markets::TransmissionShares out = markets::TransmissionShares::zeros(sys);
  std::vector<std::string> link_names;
  for (const auto& e : sys.links) link_names.push_back(e.name);
  for (auto it = j.at("chi").begin(); it != j.at("chi").end(); ++it) {
    int e = index_of(link_names, it.key(), "link");
    out.chi[e] = it.value().get<double>();
  }
  out.validate(sys);
  return out;
}

}  // namespace gridmech::io
