#pragma once

#include "scbadmm/scb.hpp"

namespace scbadmm {

// Directly extended multi-block ADMM: a single Gauss-Seidel sweep per
// iteration with the same semi-proximal block subproblems as the SCB scheme
// but no backward correction passes.  Has no convergence guarantee for more
// than two blocks; reports Diverged when the constraint residual overflows.
SolveResult direct_admm_solve(const BlockProblem& pb, const SolverConfig& cfg,
                              const ResidualFn& residual = {});

}  // namespace scbadmm
