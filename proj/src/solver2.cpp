#include "scbadmm/solver2.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace scbadmm {

bool gram_is_identity(const LinearMap& map) {
  std::mt19937_64 rng(777001u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < 3; ++t) {
    Vec w(map.cod_dim);
    for (int i = 0; i < map.cod_dim; ++i) w[i] = gauss(rng);
    const Vec g = map.apply(map.adjoint_apply(w));
    if ((g - w).norm() > 1e-10 * (1.0 + w.norm())) return false;
  }
  return true;
}

Vec apply_fn_hessian(const ProxFriendlyFunction& fn, const Vec& u) {
  Vec out = Vec::Zero(u.size());
  int off = 0;
  for (const auto& c : fn.comps) {
    if (c.kind == ProxComponent::Kind::Quadratic)
      out.segment(off, c.dim) = c.Sigma.apply(u.segment(off, c.dim));
    off += c.dim;
  }
  return out;
}

Vec solve_block_qp(const ProxFriendlyFunction& fn, const Mat& M, const Vec& q) {
  const int d = fn.dim();
  if (static_cast<int>(q.size()) != d || M.rows() != d) throw std::invalid_argument("solve_block_qp: dimension mismatch");
  if (!fn.is_qp_friendly()) throw std::invalid_argument("solve_block_qp: block has matrix-cone components");

  Mat H = M + fn.hessian_dense();
  Vec lin = q - fn.linear_term();

  // Collect bound constraints coming from indicator components.
  std::vector<int> bidx;
  std::vector<double> blo, bhi;
  int off = 0;
  for (const auto& c : fn.comps) {
    if (c.kind == ProxComponent::Kind::BoxIndicator) {
      for (int i = 0; i < c.dim; ++i) {
        if (std::isinf(c.box.lo[i]) && std::isinf(c.box.hi[i])) continue;
        bidx.push_back(off + i);
        blo.push_back(c.box.lo[i]);
        bhi.push_back(c.box.hi[i]);
      }
    } else if (c.kind == ProxComponent::Kind::NonnegIndicator) {
      for (int i = 0; i < c.dim; ++i) {
        bidx.push_back(off + i);
        blo.push_back(0.0);
        bhi.push_back(kInf);
      }
    }
    off += c.dim;
  }

  const int k = static_cast<int>(bidx.size());
  if (k == 0) {
    Eigen::LDLT<Mat> fact(H);
    if (fact.info() != Eigen::Success) throw std::runtime_error("solve_block_qp: singular system");
    return fact.solve(Vec(-lin));
  }
  double combos = 1.0;
  for (int i = 0; i < k; ++i) {
    combos *= 1.0 + (std::isfinite(blo[i]) ? 1.0 : 0.0) + (std::isfinite(bhi[i]) ? 1.0 : 0.0);
    if (combos > 60000.0) throw std::invalid_argument("solve_block_qp: active-set enumeration too large");
  }

  const double scale = 1.0 + H.cwiseAbs().maxCoeff() + lin.cwiseAbs().maxCoeff();
  for (double tol : {1e-9 * scale, 1e-7 * scale}) {
    std::vector<int> state(k, 0);  // 0 = free, 1 = at lower, 2 = at upper
    while (true) {
      bool valid_pattern = true;
      for (int i = 0; i < k; ++i) {
        if (state[i] == 1 && !std::isfinite(blo[i])) valid_pattern = false;
        if (state[i] == 2 && !std::isfinite(bhi[i])) valid_pattern = false;
      }
      if (valid_pattern) {
        std::vector<int> free_idx;
        Vec u = Vec::Zero(d);
        std::vector<bool> fixed(d, false);
        for (int i = 0; i < k; ++i) {
          if (state[i] == 1) {
            u[bidx[i]] = blo[i];
            fixed[bidx[i]] = true;
          } else if (state[i] == 2) {
            u[bidx[i]] = bhi[i];
            fixed[bidx[i]] = true;
          }
        }
        for (int i = 0; i < d; ++i)
          if (!fixed[i]) free_idx.push_back(i);
        const int nf = static_cast<int>(free_idx.size());
        bool ok = true;
        if (nf > 0) {
          Mat Hf(nf, nf);
          Vec rf(nf);
          for (int a = 0; a < nf; ++a) {
            rf[a] = -lin[free_idx[a]];
            for (int b = 0; b < nf; ++b) Hf(a, b) = H(free_idx[a], free_idx[b]);
            for (int i = 0; i < d; ++i)
              if (fixed[i]) rf[a] -= H(free_idx[a], i) * u[i];
          }
          Eigen::LDLT<Mat> fact(Hf);
          if (fact.info() != Eigen::Success) ok = false;
          if (ok) {
            Vec uf = fact.solve(rf);
            if ((Hf * uf - rf).norm() > 1e-8 * (1.0 + rf.norm())) ok = false;
            for (int a = 0; a < nf && ok; ++a) u[free_idx[a]] = uf[a];
          }
        }
        if (ok) {
          // Primal feasibility of free bounded coords, dual feasibility of fixed.
          const Vec grad = H * u + lin;
          for (int i = 0; i < k && ok; ++i) {
            const int j = bidx[i];
            if (state[i] == 0) {
              if (u[j] < blo[i] - tol || u[j] > bhi[i] + tol) ok = false;
            } else if (state[i] == 1) {
              if (grad[j] < -tol) ok = false;
            } else {
              if (grad[j] > tol) ok = false;
            }
          }
          if (ok) return u;
        }
      }
      int pos = 0;
      while (pos < k) {
        if (++state[pos] <= 2) break;
        state[pos] = 0;
        ++pos;
      }
      if (pos == k) break;
    }
  }
  throw std::runtime_error("solve_block_qp: no active set satisfied the optimality conditions");
}

Vec prox_block_update(const ProxBlock& blk, const Vec& x, const Vec& r, double sigma,
                      const SelfAdjointPSDOp* T, const Vec& center, const Vec* delta,
                      bool ff_identity_known) {
  const auto& fn = blk.fn;
  const auto& F = blk.map;
  const int d = fn.dim();

  const bool t_trivial = (T == nullptr) || T->is_zero() ||
                         (T->form == SelfAdjointPSDOp::Form::ScaledIdentity);
  const bool prox_ok = t_trivial && (ff_identity_known || gram_is_identity(F));

  if (prox_ok) {
    const double lam = (T && T->form == SelfAdjointPSDOp::Form::ScaledIdentity) ? T->scale : 0.0;
    Vec w = -F.apply(Vec(r + x / sigma));
    if (delta) w -= (*delta) / sigma;
    if (lam != 0.0) {
      w += lam * center;
      w /= (1.0 + lam);
    }
    return fn.prox(w, 1.0 / (sigma * (1.0 + lam)));
  }

  // Dense path: (1/2) u^T (Sigma_fn + sigma (FF* + T)) u
  //             + (-b_fn + F x + delta + sigma F r - sigma T center)^T u.
  Mat M = sigma * gram_dense(F);
  if (T && !T->is_zero()) M += sigma * T->to_dense();
  Vec q = F.apply(x) + sigma * F.apply(r);
  if (delta) q += *delta;
  if (T && !T->is_zero()) q -= sigma * T->apply(center);
  (void)d;
  return solve_block_qp(fn, M, q);
}

TwoBlockState spadmm2_step(const BlockProblem& pb, const TwoBlockState& st, double sigma,
                           double tau, const SelfAdjointPSDOp* T_f, const SelfAdjointPSDOp* T_g) {
  if (pb.p() != 0 || pb.q() != 0) throw std::invalid_argument("spadmm2_step: problem must have exactly two blocks");
  TwoBlockState out;
  const Vec rv = pb.g.map.adjoint_apply(st.v) - pb.c;
  out.u = prox_block_update(pb.f, st.x, rv, sigma, T_f, st.u);
  const Vec ru = pb.f.map.adjoint_apply(out.u) - pb.c;
  out.v = prox_block_update(pb.g, st.x, ru, sigma, T_g, st.v);
  out.x = st.x + tau * sigma * (pb.f.map.adjoint_apply(out.u) + pb.g.map.adjoint_apply(out.v) - pb.c);
  return out;
}

Vec delta_g_term(const BlockProblem& pb, const Vec& u, const Vec& v, const Vec& x,
                 double sigma, const Majorizer& E_g) {
  if (!pb.g.fn.is_quadratic()) throw std::invalid_argument("delta_g_term: g must be quadratic");
  const auto& G = pb.g.map;
  const auto& F = pb.f.map;
  Vec inner = pb.g.fn.linear_term() - G.apply(x) - apply_fn_hessian(pb.g.fn, v);
  inner += sigma * G.apply(Vec(pb.c - F.adjoint_apply(u) - G.adjoint_apply(v)));
  return F.apply(G.adjoint_apply(E_g.solve(inner)));
}

namespace {

Vec spalm_alpha(const BlockProblem& pb, const TwoBlockState& st, double sigma, const Majorizer& E_g) {
  return pb.g.fn.linear_term() / sigma + E_g.apply_T(st.v) +
         pb.g.map.apply(Vec(pb.c - st.x / sigma));
}

}  // namespace

TwoBlockState scb_spalm_step(const BlockProblem& pb, const TwoBlockState& st, double sigma,
                             double tau, const SelfAdjointPSDOp* T_f, const Majorizer& E_g,
                             SpalmVariant variant) {
  if (!pb.g.fn.is_quadratic()) throw std::invalid_argument("scb_spalm_step: g must be quadratic");
  const auto& F = pb.f.map;
  const auto& G = pb.g.map;
  const Vec alpha = spalm_alpha(pb, st, sigma, E_g);

  TwoBlockState out;
  if (variant == SpalmVariant::m1) {
    const Vec delta = delta_g_term(pb, st.u, st.v, st.x, sigma, E_g);
    const Vec rv = G.adjoint_apply(st.v) - pb.c;
    out.u = prox_block_update(pb.f, st.x, rv, sigma, T_f, st.u, &delta);
  } else {
    const Vec vprime = E_g.solve(Vec(alpha - G.apply(F.adjoint_apply(st.u))));
    const Vec rv = G.adjoint_apply(vprime) - pb.c;
    out.u = prox_block_update(pb.f, st.x, rv, sigma, T_f, st.u);
  }
  out.v = E_g.solve(Vec(alpha - G.apply(F.adjoint_apply(out.u))));
  out.x = st.x + tau * sigma * (F.adjoint_apply(out.u) + G.adjoint_apply(out.v) - pb.c);
  return out;
}

std::pair<Vec, Vec> scb_spalm_joint_oracle(const BlockProblem& pb, const TwoBlockState& st,
                                           double sigma, const SelfAdjointPSDOp* T_f,
                                           const SelfAdjointPSDOp* T_g, const Majorizer& E_g) {
  const int du = pb.f.fn.dim();
  const int dv = pb.g.fn.dim();
  if (du + dv > 12) throw std::invalid_argument("scb_spalm_joint_oracle: oracle limited to 12 total dims");

  const Mat Fad = pb.f.map.adjoint_to_dense();  // x_dim x du
  const Mat Gad = pb.g.map.adjoint_to_dense();

  // T_f_hat = T_f + F G* E_g^{-1} G F*.
  Mat Tfh = T_f ? T_f->to_dense() : Mat::Zero(du, du);
  {
    Mat GF(dv, du);  // columns are G F* e_j
    for (int j = 0; j < du; ++j) GF.col(j) = pb.g.map.apply(Vec(Fad.col(j)));
    Mat EinvGF(dv, du);
    for (int j = 0; j < du; ++j) EinvGF.col(j) = E_g.solve(Vec(GF.col(j)));
    Tfh += GF.transpose() * EinvGF;
  }
  Mat Tgd = T_g ? T_g->to_dense() : Mat::Zero(dv, dv);

  ProxFriendlyFunction joint;
  for (const auto& c : pb.f.fn.comps) joint.comps.push_back(c);
  for (const auto& c : pb.g.fn.comps) joint.comps.push_back(c);

  Mat M = Mat::Zero(du + dv, du + dv);
  M.topLeftCorner(du, du) = sigma * (Fad.transpose() * Fad + Tfh);
  M.bottomRightCorner(dv, dv) = sigma * (Gad.transpose() * Gad + Tgd);
  M.topRightCorner(du, dv) = sigma * Fad.transpose() * Gad;
  M.bottomLeftCorner(dv, du) = M.topRightCorner(du, dv).transpose();

  Vec q(du + dv);
  q.head(du) = Fad.transpose() * st.x - sigma * Fad.transpose() * pb.c - sigma * Tfh * st.u;
  q.tail(dv) = Gad.transpose() * st.x - sigma * Gad.transpose() * pb.c - sigma * Tgd * st.v;

  const Vec sol = solve_block_qp(joint, M, q);
  return {sol.head(du), sol.tail(dv)};
}

}  // namespace scbadmm
