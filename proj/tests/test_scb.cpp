#include <random>

#include "doctest.h"
#include "scbadmm/scb.hpp"
#include "test_helpers.hpp"

using namespace scbadmm;
using testutil::rand_mat;
using testutil::rand_spd;
using testutil::rand_vec;

TEST_CASE("quad_block_update solves its subproblem exactly") {
  std::mt19937_64 rng(81);
  const int x_dim = 5, d = 3;
  QuadraticBlock blk = testutil::rand_quad_block(rng, x_dim, d);
  const double sigma = 1.2;
  const Majorizer E = build_majorizer(sigma, blk.P, blk.A, MajorizerStrategy::Exact);

  const Vec x = rand_vec(rng, x_dim);
  const Vec center = rand_vec(rng, d);
  const Vec gamma_c = rand_vec(rng, x_dim);
  const Vec y = quad_block_update(blk, E, sigma, x, center, gamma_c);

  // Documented closed form.
  const Vec h = (blk.b - blk.A.apply(x) - blk.P.apply(center)) / sigma - blk.A.apply(gamma_c);
  CHECK((y - (E.solve(h) + center)).norm() <= 1e-10 * (1.0 + y.norm()));

  // Stationarity of theta(y) + <x, A* y> + (sigma/2)||A* y + rest||^2
  // + (sigma/2)||y - center||^2_T with rest chosen so the residual at the
  // center equals gamma_c.
  const Vec rest = gamma_c - blk.A.adjoint_apply(center);
  const Vec grad = blk.P.apply(y) - blk.b + blk.A.apply(x) +
                   sigma * blk.A.apply(Vec(blk.A.adjoint_apply(y) + rest)) +
                   sigma * E.apply_T(Vec(y - center));
  CHECK(grad.norm() <= 1e-8 * (1.0 + y.norm() + x.norm()));
}

TEST_CASE("scb_step with no quadratic blocks reproduces spadmm2_step") {
  std::mt19937_64 rng(82);
  const BlockProblem pb = testutil::rand_multiblock(rng, 0, 0, 5);
  const double sigma = 1.0, tau = 1.618;
  const BlockMajorizers maj = build_block_majorizers(pb, sigma, MajorizerStrategy::Exact);
  const bool fg = gram_is_identity(pb.f.map);
  const bool gg = gram_is_identity(pb.g.map);

  IterateState s = IterateState::zeros(pb);
  TwoBlockState t;
  t.u = s.u;
  t.v = s.v;
  t.x = s.x;
  for (int k = 0; k < 25; ++k) {
    s = scb_step(pb, s, sigma, tau, maj, fg, gg);
    t = spadmm2_step(pb, t, sigma, tau, nullptr, nullptr);
    const double scale = 1.0 + t.u.norm() + t.v.norm() + t.x.norm();
    REQUIRE((s.u - t.u).norm() <= 1e-12 * scale);
    REQUIRE((s.v - t.v).norm() <= 1e-12 * scale);
    REQUIRE((s.x - t.x).norm() <= 1e-12 * scale);
  }
}

TEST_CASE("one scb_step equals the grouped 2-block step") {
  std::mt19937_64 rng(83);
  SolverConfig cfg;
  cfg.sigma = 1.1;
  cfg.tau = 1.3;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 3);
    const int q = 1 + static_cast<int>(rng() % 3);
    const BlockProblem pb = testutil::rand_multiblock(rng, p, q, 3, 2);
    const IterateState st = testutil::rand_state(rng, pb);
    const EquivalenceReport rep = scb_equivalence_check(pb, st, cfg);
    CHECK(rep.max_dev <= 1e-9);
  }
}

TEST_CASE("beta_recursion at p = 1 relabels the delta_g correction") {
  std::mt19937_64 rng(84);
  const BlockProblem pb = testutil::rand_multiblock(rng, 1, 0, 4, 3);
  const IterateState st = testutil::rand_state(rng, pb);
  const double sigma = 0.9;

  const BetaRecursion br = beta_recursion(pb, st, sigma);
  REQUIRE(br.beta.size() == 1);
  REQUIRE(br.beta[0].size() == 1);
  CHECK((br.delta_theta - br.beta[0][0]).norm() == 0.0);

  // Relabel theta_1 as the g-block of a 2-block problem whose constant
  // absorbs the remaining contributions, so the constraint residuals match.
  BlockProblem pb2;
  pb2.f = pb.f;
  pb2.g.fn = ProxFriendlyFunction::single(
      ProxComponent::quadratic(pb.theta[0].P, pb.theta[0].b));
  pb2.g.map = pb.theta[0].A;
  pb2.c = pb.c - pb.g.map.adjoint_apply(st.v);

  const Majorizer E1 = build_majorizer(sigma, pb.theta[0].P, pb.theta[0].A,
                                       MajorizerStrategy::Exact);
  const Vec dg = delta_g_term(pb2, st.u, st.y[0], st.x, sigma, E1);
  CHECK((br.delta_theta - dg).norm() <= 1e-9 * (1.0 + dg.norm()));
}

TEST_CASE("beta_recursion vanishes at a centered feasible point") {
  std::mt19937_64 rng(85);
  BlockProblem pb = testutil::rand_multiblock(rng, 2, 0, 4, 2);
  for (auto& t : pb.theta) t.b.setZero();
  pb.c.setZero();
  IterateState st = IterateState::zeros(pb);  // gamma_bar = 0 at the origin
  const BetaRecursion br = beta_recursion(pb, st, 1.0);
  CHECK(br.delta_theta.norm() <= 1e-12);
  for (const auto& row : br.beta)
    for (const auto& b : row) CHECK(b.norm() <= 1e-12);
}

TEST_CASE("beta_recursion matches a dense reimplementation for p = 3") {
  std::mt19937_64 rng(86);
  const BlockProblem pb = testutil::rand_multiblock(rng, 3, 1, 4, 2);
  const IterateState st = testutil::rand_state(rng, pb);
  const double sigma = 1.4;

  std::vector<Majorizer> maj;
  for (const auto& blk : pb.theta)
    maj.push_back(build_majorizer(sigma, blk.P, blk.A, MajorizerStrategy::Exact));
  const BetaRecursion br = beta_recursion(pb, st, sigma, &maj);

  // Downward recursion with dense matrices: block p first, each inner term
  // subtracting the already-computed deeper contributions.
  const Vec gb = -constraint_residual(pb, st);
  const int p = pb.p();
  std::vector<Vec> w(p);
  Vec acc = Vec::Zero(pb.x_dim());
  for (int i = p - 1; i >= 0; --i) {
    const Mat Ai = pb.theta[i].A.to_dense();
    Vec inner = pb.theta[i].b - Ai * st.x - pb.theta[i].P.to_dense() * st.y[i] +
                sigma * Ai * gb;
    if (i < p - 1) inner -= Ai * acc;
    w[i] = Ai.transpose() * maj[i].solve(inner);
    acc += w[i];
  }
  Vec delta = Vec::Zero(pb.f.fn.dim());
  for (int i = 0; i < p; ++i) {
    REQUIRE(static_cast<int>(br.beta[i].size()) == i + 1);
    for (int j = 0; j <= i; ++j) {
      const Vec ref = (j == 0) ? Vec(pb.f.map.to_dense() * w[i])
                               : Vec(pb.theta[j - 1].A.to_dense() * w[i]);
      CHECK((br.beta[i][j] - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
    }
    delta += pb.f.map.to_dense() * w[i];
  }
  CHECK((br.delta_theta - delta).norm() <= 1e-9 * (1.0 + delta.norm()));

  CHECK_THROWS(beta_recursion(testutil::rand_multiblock(rng, 0, 0, 3), st, sigma));
}

TEST_CASE("stacked_proximal_dense matches the manual recursion for p = 1") {
  std::mt19937_64 rng(87);
  const int x_dim = 4, df = 2, d1 = 2;
  const LinearMap F = LinearMap::from_matrix(rand_mat(rng, df, x_dim));
  const Mat Tf = rand_spd(rng, df, 0.05);
  QuadraticBlock blk = testutil::rand_quad_block(rng, x_dim, d1);
  const double sigma = 1.0;
  std::vector<Majorizer> maj{build_majorizer(sigma, blk.P, blk.A, MajorizerStrategy::Exact)};

  const Mat out = stacked_proximal_dense(F, Tf, {blk}, maj, sigma);
  REQUIRE(out.rows() == df + d1);

  // K = A_1 F^* maps the f-block into the first quadratic block.
  const Mat K = blk.A.to_dense() * F.to_dense().transpose();
  Mat Einv(d1, d1);
  Vec e = Vec::Zero(d1);
  for (int j = 0; j < d1; ++j) {
    e[j] = 1.0;
    Einv.col(j) = maj[0].solve(e);
    e[j] = 0.0;
  }
  Mat T1(d1, d1);
  for (int j = 0; j < d1; ++j) {
    e[j] = 1.0;
    T1.col(j) = maj[0].apply_T(e);
    e[j] = 0.0;
  }
  Mat ref = Mat::Zero(df + d1, df + d1);
  ref.topLeftCorner(df, df) = Tf + K.transpose() * Einv * K;
  ref.bottomRightCorner(d1, d1) = T1;
  CHECK((out - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
}

TEST_CASE("schur_pd_check on engineered definite and singular cases") {
  std::mt19937_64 rng(88);
  const int x_dim = 4;
  BlockProblem pb;
  pb.c = rand_vec(rng, x_dim);
  pb.f.fn = ProxFriendlyFunction::single(ProxComponent::zero(2));
  pb.f.map = testutil::rand_orthonormal_rows(rng, x_dim, 2);  // FF* = I
  pb.g.fn = ProxFriendlyFunction::single(ProxComponent::zero(2));
  pb.g.map = testutil::rand_orthonormal_rows(rng, x_dim, 2);
  pb.theta.push_back(testutil::rand_quad_block(rng, x_dim, 2));
  pb.phi.push_back(testutil::rand_quad_block(rng, x_dim, 2));

  // FF* = I, Sigma_f = 0, T_f = 0: both assemblies are positive definite.
  const SchurPdReport good = schur_pd_check(pb, 1.0, nullptr, nullptr);
  CHECK(good.f_lhs_pd);
  CHECK(good.f_rhs_pd);
  CHECK(good.g_lhs_pd);
  CHECK(good.g_rhs_pd);

  // F = 0 with no proximal/quadratic contribution: both sides singular.
  BlockProblem sing = pb;
  sing.f.map = LinearMap::zero(x_dim, 2);
  const SchurPdReport bad = schur_pd_check(sing, 1.0, nullptr, nullptr);
  CHECK_FALSE(bad.f_lhs_pd);
  CHECK_FALSE(bad.f_rhs_pd);
  CHECK(bad.g_lhs_pd);
  CHECK(bad.g_rhs_pd);

  // The two sides always agree (Schur-complement equivalence).
  for (int trial = 0; trial < 20; ++trial) {
    const BlockProblem rp = testutil::rand_multiblock(rng, 1 + static_cast<int>(rng() % 2),
                                                      1 + static_cast<int>(rng() % 2), 4, 2);
    const SchurPdReport rep = schur_pd_check(rp, 0.7, nullptr, nullptr);
    CHECK(rep.f_lhs_pd == rep.f_rhs_pd);
    CHECK(rep.g_lhs_pd == rep.g_rhs_pd);
  }
}

TEST_CASE("scb_spadmm_solve reports a consistent trace and termination") {
  std::mt19937_64 rng(89);
  const BlockProblem pb = testutil::rand_multiblock(rng, 2, 1, 4, 2);
  SolverConfig cfg;
  cfg.tol = 1e-7;
  cfg.max_iter = 20000;
  cfg.log_every = 50;
  const SolveResult res = scb_spadmm_solve(pb, cfg);
  REQUIRE(res.termination == Termination::ToleranceMet);
  REQUIRE(!res.trace.empty());
  const ResidualReport& last = res.trace.back();
  CHECK(last.eta <= cfg.tol);
  // The final report matches an independent evaluation of the same state.
  CHECK(eta_general(pb, res.state, false).eta == doctest::Approx(last.eta).epsilon(1e-10));
  // Primal residual is controlled at termination.
  CHECK(constraint_residual(pb, res.state).norm() <= cfg.tol * (1.0 + pb.c.norm()));
  for (size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].iter > res.trace[i - 1].iter);
    CHECK(res.trace[i].elapsed_s >= res.trace[i - 1].elapsed_s);
  }
  CHECK(res.wall_seconds >= 0.0);
  // Block order lists the scheme and every block.
  REQUIRE(!res.block_order.empty());
  CHECK(res.block_order.front() == "scb");
}

TEST_CASE("scb_spadmm_solve stops at max_iter and detects stagnation") {
  std::mt19937_64 rng(90);
  const BlockProblem pb = testutil::rand_multiblock(rng, 1, 1, 4, 2);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 3;
  const SolveResult res = scb_spadmm_solve(pb, cfg);
  CHECK(res.termination == Termination::MaxIter);
  CHECK(res.state.iter == 3);

  // Infeasible pinned problem: u = v = 0 forced while c = 1, so eta freezes.
  BlockProblem stuck;
  stuck.c = Vec::Constant(1, 1.0);
  stuck.f.fn = ProxFriendlyFunction::single(
      ProxComponent::box_indicator(BoxParams::uniform(1, 0.0, 0.0)));
  stuck.f.map = LinearMap::identity(1);
  stuck.g.fn = ProxFriendlyFunction::single(
      ProxComponent::box_indicator(BoxParams::uniform(1, 0.0, 0.0)));
  stuck.g.map = LinearMap::identity(1);
  SolverConfig scfg;
  scfg.tol = 1e-9;
  scfg.max_iter = 10000;
  const SolveResult sres = scb_spadmm_solve(stuck, scfg);
  CHECK(sres.termination == Termination::Stagnation);
  CHECK(sres.state.iter <= scfg.stagnation_window + 10);
}

TEST_CASE("condition-b partial sum is tracked only for large tau") {
  std::mt19937_64 rng(91);
  const BlockProblem pb = testutil::rand_multiblock(rng, 1, 0, 4, 2);
  SolverConfig cfg;
  cfg.tol = 1e-6;
  cfg.max_iter = 5000;
  cfg.tau = 1.618;
  const SolveResult below = scb_spadmm_solve(pb, cfg);
  CHECK(below.condition_b_partial_sum == 0.0);
  cfg.tau = 1.7;
  const SolveResult above = scb_spadmm_solve(pb, cfg);
  CHECK(above.condition_b_partial_sum > 0.0);
}
