#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace scbadmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Symmetric matrices are stored as vectors of length n(n+1)/2: upper triangle
// stacked column by column, off-diagonal entries scaled by sqrt(2), so the
// Frobenius inner product of two symmetric matrices equals the dot product of
// their vectorized forms.
int svec_dim(int n);
int svec_order(int dim);
Vec svec(const Mat& X);
Mat smat(const Vec& x);
// Upper-triangle entries stacked without scaling.  Hadamard multiplication by
// a symmetric H is the diagonal operator with entries svec_pattern(H) in svec
// coordinates.
Vec svec_pattern(const Mat& X);

// Abstract linear operator between Euclidean spaces.
struct LinearMap {
  int dom_dim = 0;
  int cod_dim = 0;
  std::function<Vec(const Vec&)> apply;          // x -> A x
  std::function<Vec(const Vec&)> adjoint_apply;  // w -> A* w

  static LinearMap identity(int n);
  static LinearMap zero(int dom_dim, int cod_dim);
  static LinearMap from_matrix(const Mat& A);
  static LinearMap scaled_identity(int n, double s);

  Mat to_dense() const;          // apply to basis vectors
  Mat adjoint_to_dense() const;  // A* as a dense matrix
};

// Self-adjoint positive semidefinite operator.  Stored structurally so that
// resolvents (I + tS)^{-1} and majorizer solves stay closed-form whenever the
// structure allows it.
struct SelfAdjointPSDOp {
  enum class Form { Zero, ScaledIdentity, Diagonal, Dense, Custom };

  Form form = Form::Zero;
  int dim = 0;
  double scale = 0.0;                       // ScaledIdentity
  Vec diag;                                 // Diagonal
  std::shared_ptr<const Mat> dense;         // Dense
  std::function<Vec(const Vec&)> custom;    // Custom

  static SelfAdjointPSDOp zero(int dim);
  static SelfAdjointPSDOp scaled_identity(int dim, double s);
  static SelfAdjointPSDOp diagonal(Vec d);
  static SelfAdjointPSDOp from_dense(const Mat& M);
  static SelfAdjointPSDOp from_apply(int dim, std::function<Vec(const Vec&)> fn);

  Vec apply(const Vec& x) const;
  bool is_zero() const { return form == Form::Zero || (form == Form::ScaledIdentity && scale == 0.0); }
  Mat to_dense() const;
  // Solves (I + t S) out = rhs.  Dense/Custom forms factorize lazily.
  Vec resolve(double t, const Vec& rhs) const;

 private:
  mutable std::shared_ptr<Eigen::LDLT<Mat>> resolve_fact_;
  mutable double resolve_t_ = -1.0;
};

// Positive definite E together with its solve and the induced semi-proximal
// term T = E - sigma^{-1} Sigma - A A*.
struct Majorizer {
  int dim = 0;
  std::function<Vec(const Vec&)> apply_E;
  std::function<Vec(const Vec&)> solve;    // r -> E^{-1} r
  std::function<Vec(const Vec&)> apply_T;
};

enum class MajorizerStrategy { Exact, ScaledIdentity };

// Verifies <A x, w> = <x, A* w> on seeded random pairs; true iff the worst
// relative violation is at most 1e-10.  Throws on dimension mismatches.
bool check_adjoint(const LinearMap& map, int trials);

// Builds E >= sigma^{-1} Sigma + A A* (A A* acting on A's codomain).
// Exact: assemble once, add a 1e-12-scale ridge, prefactor.
// ScaledIdentity: lambda = 1.001 * power-iteration estimate of the top
// eigenvalue (200 iterations, 1e-8 relative tolerance, fixed seed).
Majorizer build_majorizer(double sigma, const SelfAdjointPSDOp& Sigma,
                          const LinearMap& A, MajorizerStrategy strategy);

// Stacks maps sharing a domain: apply concatenates, adjoint sums.
LinearMap stack_maps(const std::vector<LinearMap>& maps);

// Largest eigenvalue of a self-adjoint PSD apply, by power iteration.
double power_iteration(const std::function<Vec(const Vec&)>& apply, int dim,
                       int max_iter = 200, double tol = 1e-8);

// Dense matrix of the self-adjoint operator x -> A(A* x) on A's codomain.
Mat gram_dense(const LinearMap& A);

}  // namespace scbadmm
