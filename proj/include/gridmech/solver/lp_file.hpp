#pragma once

#include <string>

#include "gridmech/solver/milp.hpp"

namespace gridmech::solver {

/// Writes the problem in the CPLEX LP text dialect. Complementarity pairs
/// are materialized with their big-M encodings, so they must carry valid
/// big-M bounds.
void export_problem(const MixedIntegerProgram& mip, const std::string& path);

/// Reads a solution as `name value` lines (# comments allowed) and maps
/// values back onto the program's variables by name. Unknown names and
/// malformed lines raise SolverError with the offending line.
Solution import_solution(const LinearProgram& lp, const std::string& path);

}  // namespace gridmech::solver
