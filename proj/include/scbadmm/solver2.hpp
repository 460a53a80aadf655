#pragma once

#include "scbadmm/diagnostics.hpp"
#include "scbadmm/model.hpp"

namespace scbadmm {

struct TwoBlockState {
  Vec u, v, x;
};

enum class SpalmVariant { m1, m2 };

// Probes <F F* w, w> = <w, w> on seeded random vectors.
bool gram_is_identity(const LinearMap& map);

// Minimizes f(u) + (1/2) u^T M u + q^T u where f is the indicator structure of
// fn (quadratic components of fn contribute to the objective as well).  Box
// and nonnegativity components are handled by active-set enumeration; throws
// when fn contains matrix-cone components or the enumeration is too large.
Vec solve_block_qp(const ProxFriendlyFunction& fn, const Mat& M, const Vec& q);

// One semi-proximal block subproblem:
//   argmin_u  f(u) + <x, F* u> + <delta, u>
//           + (sigma/2) ||F* u + r||^2 + (sigma/2) ||u - center||^2_T
// r is the rest of the constraint residual (everything except F* u, minus c).
// Reduces to a prox evaluation when F F* = I and T is (scaled) identity;
// falls back to a dense solve / active-set QP for quadratic or box blocks.
Vec prox_block_update(const ProxBlock& blk, const Vec& x, const Vec& r, double sigma,
                      const SelfAdjointPSDOp* T, const Vec& center,
                      const Vec* delta = nullptr, bool ff_identity_known = false);

// One iteration of the generic 2-block semi-proximal ADMM: u-update against
// the current v, v-update against the new u, then x += tau*sigma*Gamma.
TwoBlockState spadmm2_step(const BlockProblem& pb, const TwoBlockState& st, double sigma,
                           double tau, const SelfAdjointPSDOp* T_f, const SelfAdjointPSDOp* T_g);

// delta_g(u, v, x) = F G* E_g^{-1} (b - G x - Sigma_g v + sigma G (c - F*u - G*v)),
// the correction linear term of the Schur-complement augmented Lagrangian
// scheme.  Requires a quadratic g-block.
Vec delta_g_term(const BlockProblem& pb, const Vec& u, const Vec& v, const Vec& x,
                 double sigma, const Majorizer& E_g);

// One SCB semi-proximal augmented Lagrangian iteration, in either of the two
// equivalent split forms: m1 adds <delta_g, u> to the u-subproblem; m2 first
// computes a backward v' and does the plain u-update against it.  Both finish
// with v+ = E_g^{-1}(alpha - G F* u+) and the multiplier update.
TwoBlockState scb_spalm_step(const BlockProblem& pb, const TwoBlockState& st, double sigma,
                             double tau, const SelfAdjointPSDOp* T_f, const Majorizer& E_g,
                             SpalmVariant variant);

// Exact joint minimizer over (u, v) of the proximal augmented Lagrangian with
// proximal terms T_f + F G* E_g^{-1} G F* on u and T_g on v, by dense
// assembly.  Test oracle; refuses more than 12 total dims.
std::pair<Vec, Vec> scb_spalm_joint_oracle(const BlockProblem& pb, const TwoBlockState& st,
                                           double sigma, const SelfAdjointPSDOp* T_f,
                                           const SelfAdjointPSDOp* T_g, const Majorizer& E_g);

// Hessian application / linear term of a (partly) quadratic prox function.
Vec apply_fn_hessian(const ProxFriendlyFunction& fn, const Vec& u);

}  // namespace scbadmm
