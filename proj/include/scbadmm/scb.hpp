#pragma once

#include <string>

#include "scbadmm/solver2.hpp"

namespace scbadmm {

enum class Termination { ToleranceMet, MaxIter, Stagnation, Diverged };

const char* termination_name(Termination t);

struct SolverConfig {
  double sigma = 1.0;
  double tau = 1.618;
  double tol = 1e-6;
  long max_iter = 25000;
  MajorizerStrategy majorizer_strategy = MajorizerStrategy::Exact;
  long log_every = 100;
  unsigned long long seed = 0;
  long stagnation_window = 1000;
  double stagnation_rel = 1e-3;
  double divergence_threshold = 1e10;
};

struct SolveResult {
  IterateState state;
  Termination termination = Termination::MaxIter;
  std::vector<ResidualReport> trace;
  double wall_seconds = 0.0;
  std::vector<std::string> block_order;
  // Running sum of ||G*(dv) + B*(dz)||^2 + tau^{-1} ||Gamma||^2, tracked when
  // tau exceeds (1+sqrt(5))/2 (the a-posteriori summability surrogate).
  double condition_b_partial_sum = 0.0;
};

struct BlockMajorizers {
  std::vector<Majorizer> theta, phi;
};

BlockMajorizers build_block_majorizers(const BlockProblem& pb, double sigma,
                                       MajorizerStrategy strategy);

// Closed-form quadratic-block subproblem:
//   argmin_y theta(y) + <x, A* y> + (sigma/2)||A* y + rest||^2
//                      + (sigma/2)||y - center||^2_T
// with E the block's majorizer and gamma_at_center the constraint residual
// evaluated with this block held at its center.  Equals
//   E^{-1}( (b - A x - P center)/sigma - A gamma_at_center ) + center.
Vec quad_block_update(const QuadraticBlock& blk, const Majorizer& E, double sigma,
                      const Vec& x, const Vec& center, const Vec& gamma_at_center);

// One full SCB-SPADMM iteration: backward sweep over theta producing y_bar,
// u-update, forward sweep over theta, backward sweep over phi producing
// z_bar, v-update, forward sweep over phi, multiplier update.
IterateState scb_step(const BlockProblem& pb, const IterateState& st, double sigma, double tau,
                      const BlockMajorizers& maj, bool f_gram_identity, bool g_gram_identity);

// One directly extended multi-block ADMM iteration: a single forward
// Gauss-Seidel pass over (f, theta..., g, phi...) with the same per-block
// semi-proximal terms, then the multiplier update.
IterateState direct_step(const BlockProblem& pb, const IterateState& st, double sigma, double tau,
                         const BlockMajorizers& maj, bool f_gram_identity, bool g_gram_identity);

SolveResult scb_spadmm_solve(const BlockProblem& pb, const SolverConfig& cfg,
                             const ResidualFn& residual = {});

struct BetaRecursion {
  Vec delta_theta;                  // f-block space
  std::vector<std::vector<Vec>> beta;  // beta[i][j], block i+1 paired with map j (0 = F)
};

// Correction-term recursion for the grouped first block: gamma_bar = -Gamma
// at the given centers, then the downward beta table and its column sum
// delta_theta.  Majorizers default to the exact strategy.
BetaRecursion beta_recursion(const BlockProblem& pb, const IterateState& st, double sigma,
                             const std::vector<Majorizer>* theta_majorizers = nullptr);

struct EquivalenceReport {
  double max_dev = 0.0;
};

// Verifies one scb_step equals one grouped 2-block step whose first block is
// (u, y) with proximal term blkdiag(T_hat_f, T_theta_p) and second block is
// (v, z) with blkdiag(T_hat_g, T_phi_q), solved jointly by dense QP.
EquivalenceReport scb_equivalence_check(const BlockProblem& pb, const IterateState& st,
                                        const SolverConfig& cfg);

// Dense stacked proximal term for the grouped first block: the recursion
// T_hat_1 = T_f + (A_1 F_1*)^T E_1^{-1} (A_1 F_1*), then block-diagonal growth.
// Returns the full blkdiag(T_hat_p, T_p) operator for the (u, y) stack.
Mat stacked_proximal_dense(const LinearMap& Fmap, const Mat& T_first,
                           const std::vector<QuadraticBlock>& blocks,
                           const std::vector<Majorizer>& majorizers, double sigma);

struct SchurPdReport {
  bool f_lhs_pd = false, f_rhs_pd = false;
  bool g_lhs_pd = false, g_rhs_pd = false;
};

// Assembles, for each side, the stacked operator
//   F_{p+1} F_{p+1}* + sigma^{-1} Sigma_{f_{p+1}} + blkdiag(T_hat_f_p, T_theta_p)
// and the reduced operator F F* + sigma^{-1} Sigma_f + T_f, and reports
// positive definiteness of each from the dense minimum eigenvalue.
SchurPdReport schur_pd_check(const BlockProblem& pb, double sigma,
                             const SelfAdjointPSDOp* T_f, const SelfAdjointPSDOp* T_g);

}  // namespace scbadmm
