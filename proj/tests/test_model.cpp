#include <random>

#include "doctest.h"
#include "scbadmm/baseline.hpp"
#include "scbadmm/model.hpp"
#include "scbadmm/scb.hpp"
#include "test_helpers.hpp"

using namespace scbadmm;
using testutil::rand_mat;
using testutil::rand_spd;
using testutil::rand_vec;

TEST_CASE("validate flags inconsistent dimensions") {
  std::mt19937_64 rng(41);
  BlockProblem pb = testutil::rand_multiblock(rng, 1, 1, 5);
  CHECK_NOTHROW(pb.validate());

  BlockProblem bad_c = pb;
  bad_c.c = rand_vec(rng, 4);
  CHECK_THROWS(bad_c.validate());

  BlockProblem bad_f = pb;
  bad_f.f.fn.comps.push_back(ProxComponent::zero(1));
  CHECK_THROWS(bad_f.validate());

  BlockProblem bad_theta = pb;
  bad_theta.theta[0].b = rand_vec(rng, static_cast<int>(bad_theta.theta[0].b.size()) + 1);
  CHECK_THROWS(bad_theta.validate());
}

TEST_CASE("IterateState::zeros matches block dimensions") {
  std::mt19937_64 rng(42);
  const BlockProblem pb = testutil::rand_multiblock(rng, 2, 1, 6);
  const IterateState s = IterateState::zeros(pb);
  CHECK(s.u.size() == pb.f.fn.dim());
  CHECK(s.v.size() == pb.g.fn.dim());
  CHECK(s.x.size() == pb.x_dim());
  REQUIRE(s.y.size() == 2);
  REQUIRE(s.z.size() == 1);
  CHECK(s.y[0].size() == pb.theta[0].b.size());
  CHECK(s.z[0].size() == pb.phi[0].b.size());
  CHECK(s.u.norm() == 0.0);
}

TEST_CASE("constraint_residual equals the dense composition and is affine") {
  std::mt19937_64 rng(43);
  const BlockProblem pb = testutil::rand_multiblock(rng, 2, 2, 5);
  const IterateState s = testutil::rand_state(rng, pb);

  Vec ref = pb.f.map.adjoint_to_dense() * s.u + pb.g.map.adjoint_to_dense() * s.v - pb.c;
  for (int i = 0; i < pb.p(); ++i) ref += pb.theta[i].A.adjoint_to_dense() * s.y[i];
  for (int j = 0; j < pb.q(); ++j) ref += pb.phi[j].A.adjoint_to_dense() * s.z[j];
  CHECK((constraint_residual(pb, s) - ref).norm() <= 1e-11 * (1.0 + ref.norm()));

  // Affinity: Gamma(a) + Gamma(b) = Gamma(a+b) + Gamma(0).
  const IterateState s2 = testutil::rand_state(rng, pb);
  IterateState sum = s;
  sum.u += s2.u;
  sum.v += s2.v;
  for (size_t i = 0; i < sum.y.size(); ++i) sum.y[i] += s2.y[i];
  for (size_t j = 0; j < sum.z.size(); ++j) sum.z[j] += s2.z[j];
  const Vec lhs = constraint_residual(pb, s) + constraint_residual(pb, s2);
  const Vec rhs = constraint_residual(pb, sum) + constraint_residual(pb, IterateState::zeros(pb));
  CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));

  IterateState mismatched = s;
  mismatched.y.pop_back();
  CHECK_THROWS(constraint_residual(pb, mismatched));
}

TEST_CASE("quadratic block value and conjugate") {
  std::mt19937_64 rng(44);
  const int d = 4;
  QuadraticBlock blk;
  const Mat P = rand_spd(rng, d);
  blk.P = SelfAdjointPSDOp::from_dense(P);
  blk.b = rand_vec(rng, d);
  blk.A = LinearMap::identity(d);

  const Vec y = rand_vec(rng, d);
  CHECK(quadratic_block_value(blk, y) ==
        doctest::Approx(0.5 * y.dot(P * y) - blk.b.dot(y)));

  // For positive definite P: theta*(r) = (1/2)(r+b)^T P^{-1} (r+b).
  const Vec r = rand_vec(rng, d);
  const Vec sol = P.ldlt().solve(r + blk.b);
  CHECK(quadratic_block_conj(blk, r) == doctest::Approx(0.5 * (r + blk.b).dot(sol)).epsilon(1e-9));

  // Fenchel-Young equality at r = P y - b.
  const Vec r_star = P * y - blk.b;
  CHECK(quadratic_block_value(blk, y) + quadratic_block_conj(blk, r_star) ==
        doctest::Approx(y.dot(r_star)).epsilon(1e-8));

  // Singular P: the conjugate is finite only on the affine range.
  QuadraticBlock sing;
  Mat Ps = Mat::Zero(2, 2);
  Ps(0, 0) = 2.0;
  sing.P = SelfAdjointPSDOp::from_dense(Ps);
  sing.b = Vec::Zero(2);
  sing.A = LinearMap::identity(2);
  CHECK(quadratic_block_conj(sing, (Vec(2) << 3.0, 0.0).finished()) == doctest::Approx(9.0 / 4.0));
  CHECK(std::isinf(quadratic_block_conj(sing, (Vec(2) << 0.0, 1.0).finished())));

  // Zero P behaves as the indicator of {r = -b}.
  QuadraticBlock lin;
  lin.P = SelfAdjointPSDOp::zero(2);
  lin.b = (Vec(2) << 1.0, -2.0).finished();
  lin.A = LinearMap::identity(2);
  CHECK(quadratic_block_conj(lin, Vec(-lin.b)) == 0.0);
  CHECK(std::isinf(quadratic_block_conj(lin, Vec::Zero(2))));
}

TEST_CASE("objective_values on a hand-checkable instance") {
  // min (1/2)u^2 - u + (1/2)y^2  s.t.  u + y = 2.
  BlockProblem pb;
  pb.c = Vec::Constant(1, 2.0);
  pb.f.fn = ProxFriendlyFunction::single(
      ProxComponent::quadratic(SelfAdjointPSDOp::scaled_identity(1, 1.0), Vec::Constant(1, 1.0)));
  pb.f.map = LinearMap::identity(1);
  pb.g.fn = ProxFriendlyFunction::single(
      ProxComponent::quadratic(SelfAdjointPSDOp::scaled_identity(1, 1.0), Vec::Zero(1)));
  pb.g.map = LinearMap::identity(1);

  // Optimum: u = 1.5, v = 0.5, multiplier x = -0.5.
  IterateState s = IterateState::zeros(pb);
  s.u = Vec::Constant(1, 1.5);
  s.v = Vec::Constant(1, 0.5);
  s.x = Vec::Constant(1, -0.5);
  const auto [obj_p, obj_d] = objective_values(pb, s);
  // f(u) + g(v) = (1.125 - 1.5) + 0.125 = -0.25.
  CHECK(obj_p == doctest::Approx(-0.25));
  // Dual value at x: -(<c,x> + f*(-x) + g*(-x)) = -(-1 + 1.125 + 0.125) = -0.25.
  CHECK(obj_d == doctest::Approx(-0.25));
}

namespace {

// Active-set oracle for  min (1/2)w^T H w - h^T w  s.t.  Aeq w = beq, w_i >= 0
// for i in the nonneg index list.  Enumerates active sets and checks KKT signs.
Vec qp_oracle(const Mat& H, const Vec& h, const Mat& Aeq, const Vec& beq,
              const std::vector<int>& nonneg) {
  const int n = static_cast<int>(H.rows());
  const int me = static_cast<int>(Aeq.rows());
  const int k = static_cast<int>(nonneg.size());
  Vec best;
  double best_val = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) active.push_back(nonneg[i]);
    const int na = static_cast<int>(active.size());
    Mat KKT = Mat::Zero(n + me + na, n + me + na);
    Vec rhs = Vec::Zero(n + me + na);
    KKT.topLeftCorner(n, n) = H;
    KKT.block(0, n, n, me) = Aeq.transpose();
    KKT.block(n, 0, me, n) = Aeq;
    for (int a = 0; a < na; ++a) {
      KKT(active[a], n + me + a) = 1.0;
      KKT(n + me + a, active[a]) = 1.0;
    }
    rhs.head(n) = h;
    rhs.segment(n, me) = beq;
    Eigen::FullPivLU<Mat> lu(KKT);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    const Vec w = sol.head(n);
    // Each candidate minimizes the strictly convex objective over the affine
    // subspace fixing the active coordinates at zero, so every feasible
    // candidate upper-bounds the optimum and the true active set attains it.
    bool ok = true;
    for (int i : nonneg)
      if (w[i] < -1e-9) ok = false;
    if (!ok) continue;
    const double val = 0.5 * w.dot(H * w) - h.dot(w);
    if (val < best_val) {
      best_val = val;
      best = w;
    }
  }
  REQUIRE(best.size() == n);
  return best;
}

}  // namespace

TEST_CASE("reformulate_inequalities preserves the optimization problem") {
  std::mt19937_64 rng(45);
  const int m = 3;   // constraint-space dimension
  const int dy = 2;  // inequality-carrying block dimension

  BlockProblem pb;
  pb.c = rand_vec(rng, m);
  const Mat Pf = rand_spd(rng, m);
  const Vec bf = rand_vec(rng, m);
  pb.f.fn = ProxFriendlyFunction::single(
      ProxComponent::quadratic(SelfAdjointPSDOp::from_dense(Pf), bf));
  pb.f.map = LinearMap::identity(m);
  const Mat Pg = rand_spd(rng, m);
  const Vec bg = rand_vec(rng, m);
  pb.g.fn = ProxFriendlyFunction::single(
      ProxComponent::quadratic(SelfAdjointPSDOp::from_dense(Pg), bg));
  pb.g.map = LinearMap::identity(m);
  QuadraticBlock th;
  const Mat Pt = rand_spd(rng, dy);
  const Vec bt = rand_vec(rng, dy);
  const Mat At = rand_mat(rng, dy, m);
  th.P = SelfAdjointPSDOp::from_dense(Pt);
  th.b = bt;
  th.A = LinearMap::from_matrix(At);
  pb.theta.push_back(th);

  SUBCASE("nullopt returns the problem unchanged") {
    const BlockProblem same = reformulate_inequalities(pb, std::nullopt, LinearMap::identity(dy));
    CHECK(same.x_dim() == pb.x_dim());
    CHECK((same.c - pb.c).norm() == 0.0);
    CHECK(same.f.fn.dim() == pb.f.fn.dim());
  }

  SUBCASE("invalid arguments throw") {
    CHECK_THROWS(reformulate_inequalities(pb, 1, LinearMap::identity(dy)));
    CHECK_THROWS(reformulate_inequalities(pb, 0, LinearMap::zero(dy, dy)));
    CHECK_THROWS(reformulate_inequalities(pb, 0, LinearMap::identity(dy + 1)));
  }

  SUBCASE("solution matches the active-set oracle") {
    Mat Dd = Mat::Zero(dy, dy);
    Dd(0, 0) = 1.0;
    Dd(1, 1) = 2.0;
    const BlockProblem ref = reformulate_inequalities(pb, 0, LinearMap::from_matrix(Dd));
    CHECK_NOTHROW(ref.validate());
    CHECK(ref.x_dim() == m + dy);
    CHECK(ref.f.fn.dim() == m + dy);

    // Oracle on the original formulation with variables (u, v, y):
    //   min (1/2)u^T Pf u - bf^T u + (1/2)v^T Pg v - bg^T v
    //       + (1/2)y^T Pt y - bt^T y
    //   s.t. u + v + At^T y = c,  y >= 0.
    const int n = 2 * m + dy;
    Mat H = Mat::Zero(n, n);
    H.topLeftCorner(m, m) = Pf;
    H.block(m, m, m, m) = Pg;
    H.bottomRightCorner(dy, dy) = Pt;
    Vec h(n);
    h.head(m) = bf;
    h.segment(m, m) = bg;
    h.tail(dy) = bt;
    Mat Aeq(m, n);
    Aeq.leftCols(m) = Mat::Identity(m, m);
    Aeq.middleCols(m, m) = Mat::Identity(m, m);
    Aeq.rightCols(dy) = At.transpose();
    const Vec w_star = qp_oracle(H, h, Aeq, pb.c, {2 * m, 2 * m + 1});

    SolverConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_iter = 60000;
    cfg.log_every = 1000;
    const SolveResult res = scb_spadmm_solve(ref, cfg);
    REQUIRE(res.termination == Termination::ToleranceMet);
    CHECK((res.state.u.head(m) - w_star.head(m)).norm() <= 1e-5 * (1.0 + w_star.norm()));
    CHECK((res.state.v - w_star.segment(m, m)).norm() <= 1e-5 * (1.0 + w_star.norm()));
    CHECK((res.state.y[0] - w_star.tail(dy)).norm() <= 1e-5 * (1.0 + w_star.norm()));
    // Slack equals the constrained block through the new row.
    CHECK((res.state.u.tail(dy) - res.state.y[0]).norm() <= 1e-5);
    CHECK(res.state.u.tail(dy).minCoeff() >= -1e-9);
  }
}
