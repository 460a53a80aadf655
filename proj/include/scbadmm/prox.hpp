#pragma once

#include <limits>
#include <vector>

#include "scbadmm/linops.hpp"

namespace scbadmm {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Elementwise box bounds in the working (vectorized) coordinates.
struct BoxParams {
  Vec lo, hi;  // entries may be +-inf
  static BoxParams uniform(int dim, double lo, double hi);
  // Box {L <= X <= U} on symmetric n x n matrices, expressed in svec
  // coordinates (off-diagonal bounds pick up the sqrt(2) scaling).
  static BoxParams matrix_uniform(int n, double lo, double hi);
};

Mat proj_psd(const Mat& X);
Mat proj_box(const Mat& X, const Mat& L, const Mat& U);
Vec proj_box(const Vec& x, const BoxParams& K);

// argmin over Z of sup_{W in K} <-Z, W> + (lambda/2) ||Z - Z_bar||^2,
// computed as Z_bar + (1/lambda) * proj_K(-lambda Z_bar).
Vec prox_support(const Vec& z_bar, double lambda, const BoxParams& K);

// Projection onto {Y : ||Y||_* <= r}: singular values are projected onto the
// l1 ball of radius r, singular vectors kept.
Mat proj_nuclear_ball(const Mat& X, double r);
Vec proj_l1_ball(const Vec& s, double r);  // nonneg input expected

// Solves (I + sigma Q) U = Q R_bar.  Structured forms are closed-form; a
// conjugate-gradient fallback handles unstructured Q and throws if it fails
// to reach 1e-12 relative residual.
Vec quad_shadow_update(const SelfAdjointPSDOp& Q, double sigma, const Vec& r_bar);
// Same update for Q(X) = (BX + XB)/2 with B = P diag(lambda) P^T, done in the
// eigenbasis; X given and returned in svec coordinates.
Vec quad_shadow_update_eig(const Mat& P, const Vec& lambda, double sigma, const Vec& r_bar);

Vec prox_quadratic_block(const Majorizer& E, const Vec& rhs);

// One separable piece of a prox-friendly function.
struct ProxComponent {
  enum class Kind {
    PsdIndicator,          // delta_{S^n_+}, svec coordinates
    BoxIndicator,          // delta_K for a box K
    BoxSupport,            // z -> sup_{w in K} <-z, w>  (= delta_K^*(-z))
    NonnegIndicator,       // delta_{R^d_+}
    NuclearBallIndicator,  // delta_{||.||_* <= r}, svec coordinates
    Zero,                  // identically zero
    Quadratic,             // (1/2)<u, Sigma u> - <b, u>
  };

  Kind kind = Kind::Zero;
  int dim = 0;
  BoxParams box;                // Box kinds
  double radius = 1.0;          // NuclearBallIndicator
  SelfAdjointPSDOp Sigma;       // Quadratic
  Vec b;                        // Quadratic

  static ProxComponent psd(int n);
  static ProxComponent box_indicator(const BoxParams& K);
  static ProxComponent box_support(const BoxParams& K);
  static ProxComponent nonneg(int dim);
  static ProxComponent nuclear_ball(int n, double r);
  static ProxComponent zero(int dim);
  static ProxComponent quadratic(SelfAdjointPSDOp Sigma, Vec b);
};

// A closed proper convex function given as a separable product of the kinds
// above.  prox(w, t) = argmin f(u) + (1/(2t)) ||u - w||^2.
struct ProxFriendlyFunction {
  std::vector<ProxComponent> comps;

  int dim() const;
  Vec prox(const Vec& w, double t) const;
  double eval(const Vec& u) const;   // extended-real
  double conj(const Vec& s) const;   // f*(s), extended-real
  // True when every component is quadratic/zero so subproblems are linear.
  bool is_quadratic() const;
  // True when every component admits a dense QP treatment (quadratic, zero,
  // or box/nonneg indicator).
  bool is_qp_friendly() const;
  // Aggregate quadratic term over the full block (zero rows for indicators).
  Mat hessian_dense() const;
  Vec linear_term() const;

  static ProxFriendlyFunction single(ProxComponent c);
  static ProxFriendlyFunction product(std::vector<ProxComponent> cs);
};

}  // namespace scbadmm
