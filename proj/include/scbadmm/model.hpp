#pragma once

#include <optional>
#include <vector>

#include "scbadmm/prox.hpp"

namespace scbadmm {

// Quadratic block (1/2)<y, P y> - <b, y> coupled through A* y (A maps the
// shared constraint space to the block space).
struct QuadraticBlock {
  SelfAdjointPSDOp P;
  Vec b;
  LinearMap A;
  // Optional closed-form majorizer of sigma^{-1} P + A A* supplied by the
  // instance builder; the generic construction is used when absent.
  std::function<Majorizer(double sigma)> majorizer_factory;
};

// Nonsmooth block f with coupling F (F maps the constraint space to the block
// space; the constraint carries F* u).
struct ProxBlock {
  ProxFriendlyFunction fn;
  LinearMap map;
};

// min f(u) + sum_i theta_i(y_i) + g(v) + sum_j phi_j(z_j)
// s.t. F* u + sum_i A_i* y_i + G* v + sum_j B_j* z_j = c.
struct BlockProblem {
  ProxBlock f;
  std::vector<QuadraticBlock> theta;
  ProxBlock g;
  std::vector<QuadraticBlock> phi;
  Vec c;

  int x_dim() const { return static_cast<int>(c.size()); }
  int p() const { return static_cast<int>(theta.size()); }
  int q() const { return static_cast<int>(phi.size()); }
  void validate() const;  // throws on inconsistent dimensions
};

struct IterateState {
  Vec u, v, x;
  std::vector<Vec> y, z;
  std::vector<Vec> y_bar, z_bar;  // backward-sweep intermediates
  long iter = 0;

  static IterateState zeros(const BlockProblem& pb);
};

// Gamma(u, y, v, z) = F* u + sum A_i* y_i + G* v + sum B_j* z_j - c.
Vec constraint_residual(const BlockProblem& pb, const IterateState& s);

// Primal objective evaluated directly, and the dual objective at the induced
// dual point s = -F x, r_i = -A_i x, t = -G x, w_j = -B_j x:
//   obj_D = -( <c, x> + f*(s) + sum theta_i*(r_i) + g*(t) + sum phi_j*(w_j) ),
// oriented so obj_P - obj_D -> 0 at optimality.  Infinite conjugates yield
// an infinite obj_D rather than an error.
std::pair<double, double> objective_values(const BlockProblem& pb, const IterateState& s);

double quadratic_block_value(const QuadraticBlock& blk, const Vec& y);
double quadratic_block_conj(const QuadraticBlock& blk, const Vec& r);

// Moves a nonnegativity constraint off the quadratic block theta[index]: the
// f-block gains a nonnegative slack component u_I, the constraint space gains
// the row D* u_I - D* y_I = 0, and the theta block becomes a plain quadratic
// block.  index = nullopt returns the problem unchanged.
BlockProblem reformulate_inequalities(const BlockProblem& pb, std::optional<int> index,
                                      const LinearMap& D);

}  // namespace scbadmm
