#include "scbadmm/scb.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace scbadmm {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::ToleranceMet:
      return "tolerance_met";
    case Termination::MaxIter:
      return "max_iter";
    case Termination::Stagnation:
      return "stagnation";
    case Termination::Diverged:
      return "diverged";
  }
  return "unknown";
}

BlockMajorizers build_block_majorizers(const BlockProblem& pb, double sigma,
                                       MajorizerStrategy strategy) {
  BlockMajorizers m;
  for (const auto& blk : pb.theta)
    m.theta.push_back(blk.majorizer_factory ? blk.majorizer_factory(sigma)
                                            : build_majorizer(sigma, blk.P, blk.A, strategy));
  for (const auto& blk : pb.phi)
    m.phi.push_back(blk.majorizer_factory ? blk.majorizer_factory(sigma)
                                          : build_majorizer(sigma, blk.P, blk.A, strategy));
  return m;
}

Vec quad_block_update(const QuadraticBlock& blk, const Majorizer& E, double sigma,
                      const Vec& x, const Vec& center, const Vec& gamma_at_center) {
  Vec rhs = (blk.b - blk.A.apply(x) - blk.P.apply(center)) / sigma;
  rhs -= blk.A.apply(gamma_at_center);
  return E.solve(rhs) + center;
}

namespace {

struct Contribs {
  Vec cu, cv;
  std::vector<Vec> cy, cz;
  Vec s;  // sum of all contributions

  static Contribs at(const BlockProblem& pb, const IterateState& st) {
    Contribs c;
    c.cu = pb.f.map.adjoint_apply(st.u);
    c.cv = pb.g.map.adjoint_apply(st.v);
    c.s = c.cu + c.cv;
    c.cy.resize(pb.p());
    c.cz.resize(pb.q());
    for (int i = 0; i < pb.p(); ++i) {
      c.cy[i] = pb.theta[i].A.adjoint_apply(st.y[i]);
      c.s += c.cy[i];
    }
    for (int j = 0; j < pb.q(); ++j) {
      c.cz[j] = pb.phi[j].A.adjoint_apply(st.z[j]);
      c.s += c.cz[j];
    }
    return c;
  }
};

}  // namespace

IterateState scb_step(const BlockProblem& pb, const IterateState& st, double sigma, double tau,
                      const BlockMajorizers& maj, bool f_gram_identity, bool g_gram_identity) {
  const int p = pb.p(), q = pb.q();
  IterateState out = st;
  out.y_bar.assign(p, Vec());
  out.z_bar.assign(q, Vec());
  Contribs c = Contribs::at(pb, st);
  const std::vector<Vec> cy_start = c.cy;
  const std::vector<Vec> cz_start = c.cz;

  for (int i = p - 1; i >= 0; --i) {
    const Vec gamma = c.s - pb.c;  // block i currently sits at its center
    out.y_bar[i] = quad_block_update(pb.theta[i], maj.theta[i], sigma, st.x, st.y[i], gamma);
    Vec cnew = pb.theta[i].A.adjoint_apply(out.y_bar[i]);
    c.s += cnew - c.cy[i];
    c.cy[i] = std::move(cnew);
  }
  {
    const Vec r = (c.s - c.cu) - pb.c;
    out.u = prox_block_update(pb.f, st.x, r, sigma, nullptr, st.u, nullptr, f_gram_identity);
    Vec cnew = pb.f.map.adjoint_apply(out.u);
    c.s += cnew - c.cu;
    c.cu = std::move(cnew);
  }
  for (int i = 0; i < p; ++i) {
    const Vec gamma = (c.s - c.cy[i] + cy_start[i]) - pb.c;
    out.y[i] = quad_block_update(pb.theta[i], maj.theta[i], sigma, st.x, st.y[i], gamma);
    Vec cnew = pb.theta[i].A.adjoint_apply(out.y[i]);
    c.s += cnew - c.cy[i];
    c.cy[i] = std::move(cnew);
  }

  for (int j = q - 1; j >= 0; --j) {
    const Vec gamma = c.s - pb.c;
    out.z_bar[j] = quad_block_update(pb.phi[j], maj.phi[j], sigma, st.x, st.z[j], gamma);
    Vec cnew = pb.phi[j].A.adjoint_apply(out.z_bar[j]);
    c.s += cnew - c.cz[j];
    c.cz[j] = std::move(cnew);
  }
  {
    const Vec r = (c.s - c.cv) - pb.c;
    out.v = prox_block_update(pb.g, st.x, r, sigma, nullptr, st.v, nullptr, g_gram_identity);
    Vec cnew = pb.g.map.adjoint_apply(out.v);
    c.s += cnew - c.cv;
    c.cv = std::move(cnew);
  }
  for (int j = 0; j < q; ++j) {
    const Vec gamma = (c.s - c.cz[j] + cz_start[j]) - pb.c;
    out.z[j] = quad_block_update(pb.phi[j], maj.phi[j], sigma, st.x, st.z[j], gamma);
    Vec cnew = pb.phi[j].A.adjoint_apply(out.z[j]);
    c.s += cnew - c.cz[j];
    c.cz[j] = std::move(cnew);
  }

  out.x = st.x + tau * sigma * (c.s - pb.c);
  out.iter = st.iter + 1;
  return out;
}

IterateState direct_step(const BlockProblem& pb, const IterateState& st, double sigma, double tau,
                         const BlockMajorizers& maj, bool f_gram_identity, bool g_gram_identity) {
  const int p = pb.p(), q = pb.q();
  IterateState out = st;
  out.y_bar.clear();
  out.z_bar.clear();
  Contribs c = Contribs::at(pb, st);

  {
    const Vec r = (c.s - c.cu) - pb.c;
    out.u = prox_block_update(pb.f, st.x, r, sigma, nullptr, st.u, nullptr, f_gram_identity);
    Vec cnew = pb.f.map.adjoint_apply(out.u);
    c.s += cnew - c.cu;
    c.cu = std::move(cnew);
  }
  for (int i = 0; i < p; ++i) {
    const Vec gamma = c.s - pb.c;
    out.y[i] = quad_block_update(pb.theta[i], maj.theta[i], sigma, st.x, st.y[i], gamma);
    Vec cnew = pb.theta[i].A.adjoint_apply(out.y[i]);
    c.s += cnew - c.cy[i];
    c.cy[i] = std::move(cnew);
  }
  {
    const Vec r = (c.s - c.cv) - pb.c;
    out.v = prox_block_update(pb.g, st.x, r, sigma, nullptr, st.v, nullptr, g_gram_identity);
    Vec cnew = pb.g.map.adjoint_apply(out.v);
    c.s += cnew - c.cv;
    c.cv = std::move(cnew);
  }
  for (int j = 0; j < q; ++j) {
    const Vec gamma = c.s - pb.c;
    out.z[j] = quad_block_update(pb.phi[j], maj.phi[j], sigma, st.x, st.z[j], gamma);
    Vec cnew = pb.phi[j].A.adjoint_apply(out.z[j]);
    c.s += cnew - c.cz[j];
    c.cz[j] = std::move(cnew);
  }

  out.x = st.x + tau * sigma * (c.s - pb.c);
  out.iter = st.iter + 1;
  return out;
}

namespace {

bool state_finite(const IterateState& st) {
  if (!st.u.allFinite() || !st.v.allFinite() || !st.x.allFinite()) return false;
  for (const auto& y : st.y)
    if (!y.allFinite()) return false;
  for (const auto& z : st.z)
    if (!z.allFinite()) return false;
  return true;
}

SolveResult run_block_solver(const BlockProblem& pb, const SolverConfig& cfg,
                             const ResidualFn& residual, bool direct) {
  pb.validate();
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw std::invalid_argument("solver: invalid config");
  const BlockMajorizers maj = build_block_majorizers(pb, cfg.sigma, cfg.majorizer_strategy);
  const bool fgi = gram_is_identity(pb.f.map);
  const bool ggi = gram_is_identity(pb.g.map);

  ResidualFn res = residual;
  if (!res)
    res = [](const BlockProblem& p2, const IterateState& s2, bool with_gap) {
      return eta_general(p2, s2, with_gap);
    };

  IterateState st = IterateState::zeros(pb);
  if (st.u.size()) st.u = pb.f.fn.prox(st.u, 1.0);
  if (st.v.size()) st.v = pb.g.fn.prox(st.v, 1.0);

  SolveResult result;
  result.block_order.push_back(direct ? "direct" : "scb");
  result.block_order.push_back("f");
  for (int i = 0; i < pb.p(); ++i) result.block_order.push_back("theta" + std::to_string(i + 1));
  result.block_order.push_back("g");
  for (int j = 0; j < pb.q(); ++j) result.block_order.push_back("phi" + std::to_string(j + 1));

  const double tau_cond_b = 0.5 * (1.0 + std::sqrt(5.0)) + 1e-12;
  const bool track_cond_b = cfg.tau > tau_cond_b;

  std::deque<double> eta_hist;
  const auto t0 = std::chrono::steady_clock::now();
  auto stamp = [&t0](ResidualReport& rr) {
    rr.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  ResidualReport rep = res(pb, st, true);
  rep.iter = 0;
  stamp(rep);
  result.trace.push_back(rep);
  if (rep.eta <= cfg.tol) {
    result.termination = Termination::ToleranceMet;
    result.state = st;
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }
  eta_hist.push_back(rep.eta);

  Termination term = Termination::MaxIter;
  for (long iter = 1; iter <= cfg.max_iter; ++iter) {
    Vec w_old;
    if (track_cond_b) {
      w_old = pb.g.map.adjoint_apply(st.v);
      for (int j = 0; j < pb.q(); ++j) w_old += pb.phi[j].A.adjoint_apply(st.z[j]);
    }

    st = direct ? direct_step(pb, st, cfg.sigma, cfg.tau, maj, fgi, ggi)
                : scb_step(pb, st, cfg.sigma, cfg.tau, maj, fgi, ggi);
    st.iter = iter;

    const Vec gamma = constraint_residual(pb, st);
    const bool finite = state_finite(st) && gamma.allFinite();
    if (!finite || gamma.norm() > cfg.divergence_threshold) {
      if (direct || !finite) {
        if (!finite && !direct) throw std::runtime_error("scb_spadmm_solve: non-finite iterate");
        if (!finite) {
          term = Termination::Diverged;
          break;
        }
      }
      if (direct && gamma.norm() > cfg.divergence_threshold) {
        term = Termination::Diverged;
        break;
      }
    }

    if (track_cond_b) {
      Vec w_new = pb.g.map.adjoint_apply(st.v);
      for (int j = 0; j < pb.q(); ++j) w_new += pb.phi[j].A.adjoint_apply(st.z[j]);
      result.condition_b_partial_sum += (w_new - w_old).squaredNorm() + gamma.squaredNorm() / cfg.tau;
    }

    const bool log_point = (cfg.log_every > 0 && iter % cfg.log_every == 0);
    ResidualReport r = res(pb, st, log_point);
    r.iter = iter;

    bool stop = false;
    if (std::isfinite(r.eta) && r.eta <= cfg.tol) {
      term = Termination::ToleranceMet;
      stop = true;
    }
    eta_hist.push_back(r.eta);
    while (static_cast<long>(eta_hist.size()) > cfg.stagnation_window + 1) eta_hist.pop_front();
    if (!stop && static_cast<long>(eta_hist.size()) == cfg.stagnation_window + 1) {
      const double old = eta_hist.front();
      if (std::isfinite(old) && std::isfinite(r.eta) && old - r.eta < cfg.stagnation_rel * old) {
        term = Termination::Stagnation;
        stop = true;
      }
    }
    if (iter == cfg.max_iter && !stop) {
      term = Termination::MaxIter;
      stop = true;
    }

    if (stop) {
      if (!log_point || std::isnan(r.obj_P)) {
        r = res(pb, st, true);
        r.iter = iter;
      }
      stamp(r);
      result.trace.push_back(r);
      break;
    }
    if (log_point) {
      stamp(r);
      result.trace.push_back(r);
    }
  }

  if (term == Termination::Diverged) {
    ResidualReport r = res(pb, st, true);
    r.iter = st.iter;
    stamp(r);
    result.trace.push_back(r);
  }
  result.termination = term;
  result.state = st;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

SolveResult scb_spadmm_solve(const BlockProblem& pb, const SolverConfig& cfg,
                             const ResidualFn& residual) {
  return run_block_solver(pb, cfg, residual, /*direct=*/false);
}

BetaRecursion beta_recursion(const BlockProblem& pb, const IterateState& st, double sigma,
                             const std::vector<Majorizer>* theta_majorizers) {
  const int p = pb.p();
  if (p < 1) throw std::invalid_argument("beta_recursion: requires at least one quadratic block");
  std::vector<Majorizer> own;
  const std::vector<Majorizer>* maj = theta_majorizers;
  if (!maj) {
    for (const auto& blk : pb.theta)
      own.push_back(blk.majorizer_factory ? blk.majorizer_factory(sigma)
                                          : build_majorizer(sigma, blk.P, blk.A, MajorizerStrategy::Exact));
    maj = &own;
  }

  const Vec gamma_bar = -constraint_residual(pb, st);
  std::vector<Vec> w(p);
  Vec W = Vec::Zero(pb.x_dim());
  for (int i = p - 1; i >= 0; --i) {
    const auto& blk = pb.theta[i];
    Vec inner = blk.b - blk.A.apply(st.x) - blk.P.apply(st.y[i]) + sigma * blk.A.apply(gamma_bar);
    if (i < p - 1) inner -= blk.A.apply(W);
    const Vec core = (*maj)[i].solve(inner);
    w[i] = blk.A.adjoint_apply(core);
    W += w[i];
  }

  BetaRecursion out;
  out.beta.resize(p);
  out.delta_theta = Vec::Zero(pb.f.fn.dim());
  for (int i = 0; i < p; ++i) {
    out.beta[i].resize(i + 1);
    for (int j = 0; j <= i; ++j)
      out.beta[i][j] = (j == 0) ? pb.f.map.apply(w[i]) : pb.theta[j - 1].A.apply(w[i]);
    out.delta_theta += out.beta[i][0];
  }
  return out;
}

Mat stacked_proximal_dense(const LinearMap& Fmap, const Mat& T_first,
                           const std::vector<QuadraticBlock>& blocks,
                           const std::vector<Majorizer>& majorizers, double sigma) {
  (void)sigma;
  Mat That = T_first;
  std::vector<LinearMap> stack_list{Fmap};
  const int p = static_cast<int>(blocks.size());
  for (int i = 0; i < p; ++i) {
    if (i > 0) {
      const int dprev = blocks[i - 1].A.cod_dim;
      Mat Tprev(dprev, dprev);
      Vec e = Vec::Zero(dprev);
      for (int j = 0; j < dprev; ++j) {
        e[j] = 1.0;
        Tprev.col(j) = majorizers[i - 1].apply_T(e);
        e[j] = 0.0;
      }
      Mat grown = Mat::Zero(That.rows() + dprev, That.cols() + dprev);
      grown.topLeftCorner(That.rows(), That.cols()) = That;
      grown.bottomRightCorner(dprev, dprev) = 0.5 * (Tprev + Tprev.transpose());
      That = std::move(grown);
      stack_list.push_back(blocks[i - 1].A);
    }
    const LinearMap Fi = stack_maps(stack_list);
    const int cur = Fi.cod_dim;
    const int di = blocks[i].A.cod_dim;
    Mat K(di, cur);
    Vec e = Vec::Zero(cur);
    for (int j = 0; j < cur; ++j) {
      e[j] = 1.0;
      K.col(j) = blocks[i].A.apply(Fi.adjoint_apply(e));
      e[j] = 0.0;
    }
    Mat EinvK(di, cur);
    for (int j = 0; j < cur; ++j) EinvK.col(j) = majorizers[i].solve(Vec(K.col(j)));
    That += K.transpose() * EinvK;
  }
  if (p == 0) return That;
  const int dlast = blocks[p - 1].A.cod_dim;
  Mat Tlast(dlast, dlast);
  Vec e = Vec::Zero(dlast);
  for (int j = 0; j < dlast; ++j) {
    e[j] = 1.0;
    Tlast.col(j) = majorizers[p - 1].apply_T(e);
    e[j] = 0.0;
  }
  Mat full = Mat::Zero(That.rows() + dlast, That.cols() + dlast);
  full.topLeftCorner(That.rows(), That.cols()) = 0.5 * (That + That.transpose());
  full.bottomRightCorner(dlast, dlast) = 0.5 * (Tlast + Tlast.transpose());
  return full;
}

namespace {

Vec concat_state(const Vec& head, const std::vector<Vec>& tail) {
  int d = static_cast<int>(head.size());
  for (const auto& t : tail) d += static_cast<int>(t.size());
  Vec out(d);
  out.head(head.size()) = head;
  int off = static_cast<int>(head.size());
  for (const auto& t : tail) {
    out.segment(off, t.size()) = t;
    off += static_cast<int>(t.size());
  }
  return out;
}

double rel_dev(const Vec& a, const Vec& b) { return (a - b).norm() / (1.0 + a.norm()); }

}  // namespace

EquivalenceReport scb_equivalence_check(const BlockProblem& pb, const IterateState& st,
                                        const SolverConfig& cfg) {
  int total = pb.f.fn.dim() + pb.g.fn.dim();
  for (const auto& t : pb.theta) total += static_cast<int>(t.b.size());
  for (const auto& t : pb.phi) total += static_cast<int>(t.b.size());
  if (total > 20) throw std::invalid_argument("scb_equivalence_check: oracle limited to 20 total dims");

  const BlockMajorizers maj = build_block_majorizers(pb, cfg.sigma, cfg.majorizer_strategy);
  const bool fgi = gram_is_identity(pb.f.map);
  const bool ggi = gram_is_identity(pb.g.map);
  const IterateState a = scb_step(pb, st, cfg.sigma, cfg.tau, maj, fgi, ggi);

  // Grouped 2-block formulation: (u, y) against (v, z) with the stacked
  // proximal terms.
  BlockProblem two;
  two.c = pb.c;
  {
    std::vector<LinearMap> ms{pb.f.map};
    two.f.fn = pb.f.fn;
    for (const auto& t : pb.theta) {
      two.f.fn.comps.push_back(ProxComponent::quadratic(t.P, t.b));
      ms.push_back(t.A);
    }
    two.f.map = stack_maps(ms);
  }
  {
    std::vector<LinearMap> ms{pb.g.map};
    two.g.fn = pb.g.fn;
    for (const auto& t : pb.phi) {
      two.g.fn.comps.push_back(ProxComponent::quadratic(t.P, t.b));
      ms.push_back(t.A);
    }
    two.g.map = stack_maps(ms);
  }

  const Mat T1 = stacked_proximal_dense(pb.f.map, Mat::Zero(pb.f.fn.dim(), pb.f.fn.dim()),
                                        pb.theta, maj.theta, cfg.sigma);
  const Mat T2 = stacked_proximal_dense(pb.g.map, Mat::Zero(pb.g.fn.dim(), pb.g.fn.dim()),
                                        pb.phi, maj.phi, cfg.sigma);
  const SelfAdjointPSDOp T1op = SelfAdjointPSDOp::from_dense(T1);
  const SelfAdjointPSDOp T2op = SelfAdjointPSDOp::from_dense(T2);

  TwoBlockState ts{concat_state(st.u, st.y), concat_state(st.v, st.z), st.x};
  const TwoBlockState b = spadmm2_step(two, ts, cfg.sigma, cfg.tau, &T1op, &T2op);

  EquivalenceReport rep;
  rep.max_dev = std::max(rep.max_dev, rel_dev(a.u, Vec(b.u.head(pb.f.fn.dim()))));
  int off = pb.f.fn.dim();
  for (int i = 0; i < pb.p(); ++i) {
    rep.max_dev = std::max(rep.max_dev, rel_dev(a.y[i], Vec(b.u.segment(off, a.y[i].size()))));
    off += static_cast<int>(a.y[i].size());
  }
  rep.max_dev = std::max(rep.max_dev, rel_dev(a.v, Vec(b.v.head(pb.g.fn.dim()))));
  off = pb.g.fn.dim();
  for (int j = 0; j < pb.q(); ++j) {
    rep.max_dev = std::max(rep.max_dev, rel_dev(a.z[j], Vec(b.v.segment(off, a.z[j].size()))));
    off += static_cast<int>(a.z[j].size());
  }
  rep.max_dev = std::max(rep.max_dev, rel_dev(a.x, b.x));
  return rep;
}

namespace {

bool dense_pd(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  return es.eigenvalues().minCoeff() > 1e-10 * std::max(1.0, top);
}

std::pair<bool, bool> schur_side(const LinearMap& Fmap, const Mat& Sigma_f, const Mat& T_first,
                                 const std::vector<QuadraticBlock>& blocks, double sigma) {
  const Mat rhs = gram_dense(Fmap) + Sigma_f / sigma + T_first;
  std::vector<Majorizer> maj;
  for (const auto& blk : blocks)
    maj.push_back(blk.majorizer_factory ? blk.majorizer_factory(sigma)
                                        : build_majorizer(sigma, blk.P, blk.A, MajorizerStrategy::Exact));
  std::vector<LinearMap> ms{Fmap};
  for (const auto& blk : blocks) ms.push_back(blk.A);
  const LinearMap Fall = stack_maps(ms);
  Mat lhs = gram_dense(Fall);
  {
    Mat Sig = Mat::Zero(Fall.cod_dim, Fall.cod_dim);
    Sig.topLeftCorner(Sigma_f.rows(), Sigma_f.cols()) = Sigma_f;
    int off = static_cast<int>(Sigma_f.rows());
    for (const auto& blk : blocks) {
      Sig.block(off, off, blk.P.dim, blk.P.dim) = blk.P.to_dense();
      off += blk.P.dim;
    }
    lhs += Sig / sigma;
  }
  lhs += stacked_proximal_dense(Fmap, T_first, blocks, maj, sigma);
  return {dense_pd(lhs), dense_pd(rhs)};
}

}  // namespace

SchurPdReport schur_pd_check(const BlockProblem& pb, double sigma,
                             const SelfAdjointPSDOp* T_f, const SelfAdjointPSDOp* T_g) {
  const int du = pb.f.fn.dim();
  const int dv = pb.g.fn.dim();
  const Mat Tf = T_f ? T_f->to_dense() : Mat::Zero(du, du);
  const Mat Tg = T_g ? T_g->to_dense() : Mat::Zero(dv, dv);
  SchurPdReport rep;
  auto [fl, fr] = schur_side(pb.f.map, pb.f.fn.hessian_dense(), Tf, pb.theta, sigma);
  rep.f_lhs_pd = fl;
  rep.f_rhs_pd = fr;
  auto [gl, gr] = schur_side(pb.g.map, pb.g.fn.hessian_dense(), Tg, pb.phi, sigma);
  rep.g_lhs_pd = gl;
  rep.g_rhs_pd = gr;
  return rep;
}

// Internal entry point shared with the baseline translation unit.
SolveResult run_block_solver_impl(const BlockProblem& pb, const SolverConfig& cfg,
                                  const ResidualFn& residual, bool direct) {
  return run_block_solver(pb, cfg, residual, direct);
}

}  // namespace scbadmm
