#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "gridmech/solver/lp_file.hpp"

namespace gridmech::solver {

namespace {

// LP-format identifiers cannot contain operators or start with a digit or
// 'e'; bracketed index names like r_plus[i3] are fine as-is.
std::string sanitize(const std::string& name, int index) {
  if (name.empty()) return "x" + std::to_string(index);
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || std::strchr("!\"#$%&()/,.;?@_`'{}|~[]", c))
      out += c;
    else
      out += '_';
  }
  char c0 = out[0];
  if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == 'e' || c0 == 'E' || c0 == '.')
    out = "v_" + out;
  return out;
}

void write_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  std::map<int, double> acc;
  for (auto [v, c] : terms) acc[v] += c;
  bool first = true;
  for (auto [v, c] : acc) {
    if (c == 0.0) continue;
    if (first) {
      os << (c < 0 ? "- " : "");
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    double a = std::abs(c);
    os << a << " " << names[v];
  }
  if (first) os << "0 " << names[0];
}

}  // namespace

void export_problem(const MixedIntegerProgram& mip, const std::string& path) {
  const LinearProgram& lp = mip.lp;
  lp.validate();
  if (!mip.pairs().empty()) mip.validate(/*require_bigm=*/true);

  // Big-M encode the pairs on a copy so the file is plain MILP.
  MixedIntegerProgram flat;
  flat.lp = lp;
  std::vector<int> bins = mip.binaries();
  for (const auto& p : mip.pairs()) {
    int z = flat.lp.add_variable("comp_z[" + p.name + "]", 0.0, 1.0);
    bins.push_back(z);
    auto a = p.a.terms;
    a.emplace_back(z, -p.big_m_a);
    flat.lp.add_constraint("comp_a[" + p.name + "]", a, Sense::LessEqual, -p.a.constant);
    auto b = p.b.terms;
    b.emplace_back(z, p.big_m_b);
    flat.lp.add_constraint("comp_b[" + p.name + "]", b, Sense::LessEqual,
                           p.big_m_b - p.b.constant);
  }
  const LinearProgram& out_lp = flat.lp;

  std::ofstream os(path);
  if (!os) throw SolverError("export_problem: cannot open '" + path + "'");
  os.precision(17);

  std::vector<std::string> names(out_lp.num_variables());
  for (int v = 0; v < out_lp.num_variables(); ++v)
    names[v] = sanitize(out_lp.variable(v).name, v);

  os << (out_lp.maximize() ? "Maximize" : "Minimize") << "\n obj: ";
  std::vector<std::pair<int, double>> obj;
  for (int v = 0; v < out_lp.num_variables(); ++v)
    if (out_lp.variable(v).cost != 0.0) obj.emplace_back(v, out_lp.variable(v).cost);
  write_terms(os, obj, names);
  os << "\nSubject To\n";
  for (int i = 0; i < out_lp.num_constraints(); ++i) {
    const auto& c = out_lp.constraint(i);
    os << " c" << i << ": ";
    write_terms(os, c.terms, names);
    switch (c.sense) {
      case Sense::LessEqual: os << " <= "; break;
      case Sense::Equal: os << " = "; break;
      case Sense::GreaterEqual: os << " >= "; break;
    }
    os << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (int v = 0; v < out_lp.num_variables(); ++v) {
    const auto& var = out_lp.variable(v);
    if (var.lb == 0.0 && var.ub == kInf) continue;
    if (var.lb == -kInf && var.ub == kInf) {
      os << " " << names[v] << " free\n";
      continue;
    }
    os << " ";
    if (var.lb == -kInf)
      os << "-inf";
    else
      os << var.lb;
    os << " <= " << names[v] << " <= ";
    if (var.ub == kInf)
      os << "+inf";
    else
      os << var.ub;
    os << "\n";
  }
  if (!bins.empty()) {
    os << "Binary\n";
    for (int v : bins) os << " " << names[v] << "\n";
  }
  os << "End\n";
}

Solution import_solution(const LinearProgram& lp, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SolverError("import_solution: cannot open '" + path + "'");

  std::map<std::string, int> lookup;
  for (int v = 0; v < lp.num_variables(); ++v) {
    lookup[lp.variable(v).name] = v;
    lookup[sanitize(lp.variable(v).name, v)] = v;
  }

  Solution sol;
  sol.status = Status::Optimal;
  sol.x.assign(lp.num_variables(), 0.0);
  sol.dual.assign(lp.num_constraints(), 0.0);

  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string stripped = line;
    auto hash = stripped.find('#');
    if (hash != std::string::npos) stripped.erase(hash);
    std::istringstream ss(stripped);
    std::string name;
    if (!(ss >> name)) continue;  // blank
    double value;
    std::string extra;
    if (!(ss >> value) || (ss >> extra)) {
      throw SolverError("import_solution: malformed line " + std::to_string(lineno) +
                        ": '" + line + "'");
    }
    auto it = lookup.find(name);
    if (it == lookup.end())
      throw SolverError("import_solution: unknown variable at line " +
                        std::to_string(lineno) + ": '" + name + "'");
    sol.x[it->second] = value;
  }

  double obj = 0.0;
  for (int v = 0; v < lp.num_variables(); ++v) obj += lp.variable(v).cost * sol.x[v];
  sol.objective = obj;
  sol.bound = obj;
  return sol;
}

}  // namespace gridmech::solver
