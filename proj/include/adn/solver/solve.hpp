#pragma once

#include <span>
#include <vector>

#include "adn/solver/problem.hpp"

namespace adn::solver {

struct ConvexOptions {
  double tolerance = 1e-9;             // relative primal/dual/complementarity target
  double acceptable_tolerance = 1e-6;  // accepted when progress stalls
  int max_iterations = 100;
  int stall_iterations = 12;               // iterations without progress before giving up
  double infeasibility_tolerance = 1e-7;   // phase-1 residual above which the problem is infeasible
};

/// Interior-point solve of the continuous relaxation (binaries keep their
/// [0,1] box unless fixed by equal bounds). Never throws on infeasibility;
/// the status carries the outcome.
Solution solve_convex(const MiqpProblem& p, const ConvexOptions& opts = {});

/// Same, with per-variable bounds replacing the problem's box.
Solution solve_convex(const MiqpProblem& p, std::span<const double> lower,
                      std::span<const double> upper, const ConvexOptions& opts = {});

enum class MiqpBackend { BranchAndBound, Enumerate };

struct MiqpOptions {
  ConvexOptions convex;
  MiqpBackend backend = MiqpBackend::BranchAndBound;
  double integrality_tolerance = 1e-6;
  double absolute_gap = 1e-9;
  double relative_gap = 1e-10;
  int enumeration_cap = 30;   // maximum binaries for the enumeration backend
  bool decompose = true;      // split independent blocks before solving
  bool parallel = true;       // OpenMP across blocks / assignments
};

/// Globally optimal mixed-binary solve.
Solution solve_miqp(const MiqpProblem& p, const MiqpOptions& opts = {});

/// Partition of the variables into independent blocks (no shared row or
/// quadratic coupling).
struct Block {
  std::vector<Index> vars;
  std::vector<Index> rows;
};
std::vector<Block> independent_blocks(const MiqpProblem& p);
MiqpProblem extract_block(const MiqpProblem& p, const Block& b);

}  // namespace adn::solver
