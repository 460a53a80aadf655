#include "scbadmm/baseline.hpp"

namespace scbadmm {

SolveResult run_block_solver_impl(const BlockProblem& pb, const SolverConfig& cfg,
                                  const ResidualFn& residual, bool direct);

SolveResult direct_admm_solve(const BlockProblem& pb, const SolverConfig& cfg,
                              const ResidualFn& residual) {
  return run_block_solver_impl(pb, cfg, residual, /*direct=*/true);
}

}  // namespace scbadmm
