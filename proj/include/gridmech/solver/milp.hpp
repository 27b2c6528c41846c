#pragma once

#include "gridmech/solver/linear_program.hpp"

namespace gridmech::solver {

/// LP plus binary marks and complementarity pairs (a >= 0 perp b >= 0,
/// at most one side positive). Pairs are resolved by branching unless
/// Options::bigm_complementarities asks for a disjunctive encoding, in which
/// case each pair needs a strictly positive big-M bound per side.
class MixedIntegerProgram {
 public:
  LinearProgram lp;

  struct CompPair {
    std::string name;
    LinExpr a, b;
    double big_m_a = 0.0;  // valid upper bound on a over the feasible set
    double big_m_b = 0.0;
  };

  void mark_binary(int var);
  void add_complementarity(std::string name, LinExpr a, LinExpr b,
                           double big_m_a = 0.0, double big_m_b = 0.0);

  const std::vector<int>& binaries() const { return binaries_; }
  const std::vector<CompPair>& pairs() const { return pairs_; }

  void validate(bool require_bigm) const;

 private:
  std::vector<int> binaries_;
  std::vector<CompPair> pairs_;
};

/// Branch and bound; deterministic. On node-limit exit the Solution carries
/// the incumbent and the proven bound/gap rather than failing silently.
Solution solve_milp(const MixedIntegerProgram& mip, const Options& opts = {});

}  // namespace gridmech::solver
