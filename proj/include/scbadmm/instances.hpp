#pragma once

#include <Eigen/Sparse>
#include <optional>
#include <string>

#include "scbadmm/diagnostics.hpp"

namespace scbadmm {

enum class NormKind { Frobenius, Spectral };

// min (1/2)<X, QX> + <C, X>  over  S^n_+ intersect K,  A_E X = b_E.
// Everything is carried in svec coordinates.  The quadratic term is
// Q(X) = (BX + XB)/2 for a PSD matrix B = Pfac diag(lambda) Pfac^T, applied
// through the eigenbasis elementwise rule with H_ij = sqrt((lambda_i+lambda_j)/2).
struct QsdpInstance {
  int n = 0;
  SelfAdjointPSDOp Q;  // svec -> svec
  Vec C;
  LinearMap A_E;
  Vec b_E;
  BoxParams K;
  std::optional<Vec> X_feas;  // strictly feasible certificate (svec)
  Mat Pfac;
  Vec lambda;
  Mat H;
  unsigned long long seed = 0;
};

struct NcmInstance {
  int n = 0;
  Mat G;  // target matrix, unit diagonal
  Mat H;  // elementwise nonnegative weights
  NormKind norm_kind = NormKind::Frobenius;
  LinearMap A_E;  // diagonal-fixing rows
  Vec b_E;        // all ones
  BoxParams K;
  unsigned long long seed = 0;
};

// A solver-ready bundle: the block problem (the dual of the stated primal),
// the family-specific stopping residual, and how to read the primal matrix
// back out of an iterate.
struct BuiltInstance {
  std::string name;
  BlockProblem problem;
  ResidualFn residual;
  std::function<Vec(const IterateState&)> primal_X;  // svec
  // primal objective = block-problem primal value read through the duality
  // relation, shifted by this additive constant (used by the NCM-F model).
  double obj_constant = 0.0;
};

// Random solvable QSDP: rank-rank_B quadratic term, random equality rows with
// b_E generated from a strictly feasible point, cost assembled from a strictly
// feasible dual point.  K = {X >= 0}.
QsdpInstance make_random_qsdp_data(int n, int m_E, int rank_B, unsigned long long seed);
BuiltInstance build_random_qsdp(int n, int m_E, int rank_B, unsigned long long seed);

// 1-d instance  min (1/2)x^2 - x  over S^1_+, K = R; optimum X* = 1 with
// dual objective -1/2.
BuiltInstance build_scalar_qsdp();

// Assembles the 4-block dual (Z box-support, Xi quadratic shadow, y_E linear,
// S PSD) of a QSDP given in svec form.  calB is the factor map with
// Q = calB* calB (null for a linear SDP); xi_majorizer supplies the closed
// form of the Xi-block majorizer when available.
BuiltInstance assemble_qsdp_dual(std::string name, int n, const Vec& C, const LinearMap& A_E,
                                 const Vec& b_E, const BoxParams& K, const LinearMap* calB,
                                 std::function<Majorizer(double)> xi_majorizer,
                                 double obj_constant = 0.0);

// Binary-quadratic relaxation of order n0+1: variable [X0 x; x^T alpha],
// constraints diag(X0) - x = 0 and alpha = 1, K = {X >= 0}, objective
// (1/2)<Q_data, X0> + <c_data, x> plus a random rank-rank_B quadratic term.
BuiltInstance build_biq(const Eigen::SparseMatrix<double>& Q_data, const Vec& c_data,
                        int rank_B, unsigned long long seed);
QsdpInstance make_biq_data(const Eigen::SparseMatrix<double>& Q_data, const Vec& c_data,
                           int rank_B, unsigned long long seed);

// Weighted nearest-correlation instance: G = (1-alpha) Ghat + alpha E with
// unit diagonal, H tiled from a synthetic weight block.  frobenius maps to
// the QSDP dual; spectral builds the 5-block dual with the nuclear-ball
// multiplier and the splitting row Gamma - Xi = 0.
NcmInstance make_ncm_data(int n, double alpha, NormKind kind, unsigned long long seed);
BuiltInstance build_ncm(int n, double alpha, NormKind kind, unsigned long long seed);
BuiltInstance build_ncm_custom(const Mat& G, const Mat& H, const BoxParams& K, NormKind kind,
                               std::string name, bool diag_constraint = true);

// Synthetic weight block: ~24% of entries at 1e-5, the rest log-uniform in
// [2, 1.28e3], symmetrized.
Mat synthetic_h0(int order, unsigned long long seed);

struct SparseInstanceData {
  int n = 0;
  Eigen::SparseMatrix<double> Q;
  Vec c;
};

// Text format: line 1 "n nnz"; nnz lines "i j value" (1-based, upper
// triangle); optional line "c" followed by n values.  '#' starts a comment.
SparseInstanceData load_sparse_instance(const std::string& path);
void write_sparse_instance(const std::string& path, const Eigen::SparseMatrix<double>& Q,
                           const Vec& c);

}  // namespace scbadmm
