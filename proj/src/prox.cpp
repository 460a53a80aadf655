#include "scbadmm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scbadmm {

namespace {

void require_finite(const Mat& X, const char* who) {
  if (!X.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

double box_support_value(const BoxParams& K, const Vec& w) {
  const double tol = 1e-10 * (1.0 + (w.size() ? w.cwiseAbs().maxCoeff() : 0.0));
  double val = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const double wi = w[i];
    if (wi > tol) {
      if (std::isinf(K.hi[i])) return kInf;
      val += K.hi[i] * wi;
    } else if (wi < -tol) {
      if (std::isinf(K.lo[i])) return kInf;
      val += K.lo[i] * wi;
    } else if (std::isfinite(K.lo[i]) && std::isfinite(K.hi[i])) {
      val += std::max(K.hi[i] * wi, K.lo[i] * wi);
    }
  }
  return val;
}

bool in_box(const BoxParams& K, const Vec& w, double tol) {
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] < K.lo[i] - tol || w[i] > K.hi[i] + tol) return false;
  }
  return true;
}

}  // namespace

BoxParams BoxParams::uniform(int dim, double lo, double hi) {
  BoxParams K;
  K.lo = Vec::Constant(dim, lo);
  K.hi = Vec::Constant(dim, hi);
  return K;
}

BoxParams BoxParams::matrix_uniform(int n, double lo, double hi) {
  const double s = std::sqrt(2.0);
  BoxParams K;
  K.lo.resize(svec_dim(n));
  K.hi.resize(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double f = (i == j) ? 1.0 : s;
      K.lo[k] = std::isinf(lo) ? lo : f * lo;
      K.hi[k] = std::isinf(hi) ? hi : f * hi;
      ++k;
    }
  return K;
}

Mat proj_psd(const Mat& X) {
  require_finite(X, "proj_psd");
  Mat S = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  Vec d = es.eigenvalues().cwiseMax(0.0);
  Mat out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Mat proj_box(const Mat& X, const Mat& L, const Mat& U) {
  require_finite(X, "proj_box");
  if ((L.array() > U.array()).any()) throw std::invalid_argument("proj_box: lower bound exceeds upper bound");
  return X.cwiseMax(L).cwiseMin(U);
}

Vec proj_box(const Vec& x, const BoxParams& K) {
  if ((K.lo.array() > K.hi.array()).any()) throw std::invalid_argument("proj_box: lower bound exceeds upper bound");
  return x.cwiseMax(K.lo).cwiseMin(K.hi);
}

Vec prox_support(const Vec& z_bar, double lambda, const BoxParams& K) {
  if (!(lambda > 1e-300)) throw std::invalid_argument("prox_support: lambda too small");
  return z_bar + proj_box(Vec(-lambda * z_bar), K) / lambda;
}

Vec proj_l1_ball(const Vec& s, double r) {
  if (s.sum() <= r) return s;
  std::vector<double> srt(s.data(), s.data() + s.size());
  std::sort(srt.begin(), srt.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (size_t k = 0; k < srt.size(); ++k) {
    cum += srt[k];
    const double cand = (cum - r) / static_cast<double>(k + 1);
    if (k + 1 == srt.size() || srt[k + 1] <= cand) {
      theta = cand;
      break;
    }
  }
  return (s.array() - theta).cwiseMax(0.0).matrix();
}

Mat proj_nuclear_ball(const Mat& X, double r) {
  require_finite(X, "proj_nuclear_ball");
  if (!(r > 0.0)) throw std::invalid_argument("proj_nuclear_ball: radius must be positive");
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec sv = proj_l1_ball(svd.singularValues(), r);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

Vec quad_shadow_update(const SelfAdjointPSDOp& Q, double sigma, const Vec& r_bar) {
  if (!(sigma > 0.0)) throw std::invalid_argument("quad_shadow_update: sigma must be positive");
  switch (Q.form) {
    case SelfAdjointPSDOp::Form::Zero:
      return Vec::Zero(Q.dim);
    case SelfAdjointPSDOp::Form::ScaledIdentity:
      return (Q.scale / (1.0 + sigma * Q.scale)) * r_bar;
    case SelfAdjointPSDOp::Form::Diagonal:
      return (Q.diag.array() / (1.0 + sigma * Q.diag.array())).matrix().cwiseProduct(r_bar);
    case SelfAdjointPSDOp::Form::Dense:
      return Q.resolve(sigma, Q.apply(r_bar));
    case SelfAdjointPSDOp::Form::Custom: {
      // Conjugate gradients on (I + sigma Q) u = Q r_bar.
      const Vec rhs = Q.apply(r_bar);
      const double rhs_norm = rhs.norm();
      Vec u = Vec::Zero(Q.dim);
      if (rhs_norm == 0.0) return u;
      Vec res = rhs;
      Vec p = res;
      double rr = res.squaredNorm();
      const int max_it = 40 * Q.dim + 100;
      for (int it = 0; it < max_it; ++it) {
        Vec Ap = p + sigma * Q.apply(p);
        const double alpha = rr / p.dot(Ap);
        u += alpha * p;
        res -= alpha * Ap;
        const double rr_next = res.squaredNorm();
        if (std::sqrt(rr_next) <= 1e-13 * rhs_norm) return u;
        p = res + (rr_next / rr) * p;
        rr = rr_next;
      }
      if (res.norm() > 1e-10 * rhs_norm)
        throw std::runtime_error("quad_shadow_update: iterative solve did not converge");
      return u;
    }
  }
  return Vec::Zero(Q.dim);
}

Vec quad_shadow_update_eig(const Mat& P, const Vec& lambda, double sigma, const Vec& r_bar) {
  const int n = static_cast<int>(P.rows());
  Mat Rh = P.transpose() * smat(r_bar) * P;
  Mat Uh(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double h2 = 0.5 * (lambda[i] + lambda[j]);
      Uh(i, j) = (h2 / (1.0 + sigma * h2)) * Rh(i, j);
    }
  return svec(P * Uh * P.transpose());
}

Vec prox_quadratic_block(const Majorizer& E, const Vec& rhs) { return E.solve(rhs); }

ProxComponent ProxComponent::psd(int n) {
  ProxComponent c;
  c.kind = Kind::PsdIndicator;
  c.dim = svec_dim(n);
  return c;
}

ProxComponent ProxComponent::box_indicator(const BoxParams& K) {
  ProxComponent c;
  c.kind = Kind::BoxIndicator;
  c.dim = static_cast<int>(K.lo.size());
  c.box = K;
  return c;
}

ProxComponent ProxComponent::box_support(const BoxParams& K) {
  ProxComponent c;
  c.kind = Kind::BoxSupport;
  c.dim = static_cast<int>(K.lo.size());
  c.box = K;
  return c;
}

ProxComponent ProxComponent::nonneg(int dim) {
  ProxComponent c;
  c.kind = Kind::NonnegIndicator;
  c.dim = dim;
  return c;
}

ProxComponent ProxComponent::nuclear_ball(int n, double r) {
  ProxComponent c;
  c.kind = Kind::NuclearBallIndicator;
  c.dim = svec_dim(n);
  c.radius = r;
  return c;
}

ProxComponent ProxComponent::zero(int dim) {
  ProxComponent c;
  c.kind = Kind::Zero;
  c.dim = dim;
  return c;
}

ProxComponent ProxComponent::quadratic(SelfAdjointPSDOp Sigma, Vec b) {
  ProxComponent c;
  c.kind = Kind::Quadratic;
  c.dim = Sigma.dim;
  c.Sigma = std::move(Sigma);
  c.b = std::move(b);
  return c;
}

ProxFriendlyFunction ProxFriendlyFunction::single(ProxComponent c) {
  ProxFriendlyFunction f;
  f.comps.push_back(std::move(c));
  return f;
}

ProxFriendlyFunction ProxFriendlyFunction::product(std::vector<ProxComponent> cs) {
  ProxFriendlyFunction f;
  f.comps = std::move(cs);
  return f;
}

int ProxFriendlyFunction::dim() const {
  int d = 0;
  for (const auto& c : comps) d += c.dim;
  return d;
}

bool ProxFriendlyFunction::is_quadratic() const {
  for (const auto& c : comps)
    if (c.kind != ProxComponent::Kind::Quadratic && c.kind != ProxComponent::Kind::Zero) return false;
  return true;
}

bool ProxFriendlyFunction::is_qp_friendly() const {
  for (const auto& c : comps) {
    switch (c.kind) {
      case ProxComponent::Kind::Quadratic:
      case ProxComponent::Kind::Zero:
      case ProxComponent::Kind::BoxIndicator:
      case ProxComponent::Kind::NonnegIndicator:
        break;
      default:
        return false;
    }
  }
  return true;
}

Mat ProxFriendlyFunction::hessian_dense() const {
  const int d = dim();
  Mat H = Mat::Zero(d, d);
  int off = 0;
  for (const auto& c : comps) {
    if (c.kind == ProxComponent::Kind::Quadratic) H.block(off, off, c.dim, c.dim) = c.Sigma.to_dense();
    off += c.dim;
  }
  return H;
}

Vec ProxFriendlyFunction::linear_term() const {
  Vec b = Vec::Zero(dim());
  int off = 0;
  for (const auto& c : comps) {
    if (c.kind == ProxComponent::Kind::Quadratic) b.segment(off, c.dim) = c.b;
    off += c.dim;
  }
  return b;
}

Vec ProxFriendlyFunction::prox(const Vec& w, double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("prox: parameter must be positive");
  if (static_cast<int>(w.size()) != dim()) throw std::invalid_argument("prox: dimension mismatch");
  Vec out(w.size());
  int off = 0;
  for (const auto& c : comps) {
    const Vec wi = w.segment(off, c.dim);
    Vec oi;
    switch (c.kind) {
      case ProxComponent::Kind::PsdIndicator:
        oi = svec(proj_psd(smat(wi)));
        break;
      case ProxComponent::Kind::BoxIndicator:
        oi = proj_box(wi, c.box);
        break;
      case ProxComponent::Kind::BoxSupport:
        oi = prox_support(wi, 1.0 / t, c.box);
        break;
      case ProxComponent::Kind::NonnegIndicator:
        oi = wi.cwiseMax(0.0);
        break;
      case ProxComponent::Kind::NuclearBallIndicator:
        oi = svec(proj_nuclear_ball(smat(wi), c.radius));
        break;
      case ProxComponent::Kind::Zero:
        oi = wi;
        break;
      case ProxComponent::Kind::Quadratic:
        oi = c.Sigma.resolve(t, Vec(wi + t * c.b));
        break;
    }
    out.segment(off, c.dim) = oi;
    off += c.dim;
  }
  return out;
}

double ProxFriendlyFunction::eval(const Vec& u) const {
  double val = 0.0;
  int off = 0;
  for (const auto& c : comps) {
    const Vec ui = u.segment(off, c.dim);
    const double tol = 1e-8 * (1.0 + ui.norm());
    switch (c.kind) {
      case ProxComponent::Kind::PsdIndicator: {
        Eigen::SelfAdjointEigenSolver<Mat> es(smat(ui), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol) return kInf;
        break;
      }
      case ProxComponent::Kind::BoxIndicator:
        if (!in_box(c.box, ui, tol)) return kInf;
        break;
      case ProxComponent::Kind::BoxSupport: {
        const double s = box_support_value(c.box, Vec(-ui));
        if (std::isinf(s)) return kInf;
        val += s;
        break;
      }
      case ProxComponent::Kind::NonnegIndicator:
        if (ui.size() && ui.minCoeff() < -tol) return kInf;
        break;
      case ProxComponent::Kind::NuclearBallIndicator: {
        Eigen::JacobiSVD<Mat> svd(smat(ui));
        if (svd.singularValues().sum() > c.radius + tol) return kInf;
        break;
      }
      case ProxComponent::Kind::Zero:
        break;
      case ProxComponent::Kind::Quadratic:
        val += 0.5 * ui.dot(c.Sigma.apply(ui)) - c.b.dot(ui);
        break;
    }
    off += c.dim;
  }
  return val;
}

double ProxFriendlyFunction::conj(const Vec& s) const {
  double val = 0.0;
  int off = 0;
  for (const auto& c : comps) {
    const Vec si = s.segment(off, c.dim);
    const double tol = 1e-8 * (1.0 + si.norm());
    switch (c.kind) {
      case ProxComponent::Kind::PsdIndicator: {
        Eigen::SelfAdjointEigenSolver<Mat> es(smat(si), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().maxCoeff() > tol) return kInf;
        break;
      }
      case ProxComponent::Kind::BoxIndicator: {
        const double sv = box_support_value(c.box, si);
        if (std::isinf(sv)) return kInf;
        val += sv;
        break;
      }
      case ProxComponent::Kind::BoxSupport:
        if (!in_box(c.box, Vec(-si), tol)) return kInf;
        break;
      case ProxComponent::Kind::NonnegIndicator:
        if (si.size() && si.maxCoeff() > tol) return kInf;
        break;
      case ProxComponent::Kind::NuclearBallIndicator: {
        Eigen::JacobiSVD<Mat> svd(smat(si));
        val += c.radius * (svd.singularValues().size() ? svd.singularValues().maxCoeff() : 0.0);
        break;
      }
      case ProxComponent::Kind::Zero:
        if (si.norm() > 1e-8) return kInf;
        break;
      case ProxComponent::Kind::Quadratic: {
        const Vec rhs = si + c.b;
        if (c.Sigma.is_zero()) {
          if (rhs.norm() > 1e-8 * (1.0 + c.b.norm() + si.norm())) return kInf;
          break;
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(c.Sigma.to_dense());
        const Vec d = es.eigenvalues();
        const Vec r = es.eigenvectors().transpose() * rhs;
        const double cut = 1e-12 * std::max(1.0, d.maxCoeff());
        Vec y = Vec::Zero(r.size());
        for (int i = 0; i < r.size(); ++i)
          if (d[i] > cut) y[i] = r[i] / d[i];
        const Vec u = es.eigenvectors() * y;
        if ((c.Sigma.apply(u) - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return kInf;
        val += 0.5 * rhs.dot(u);
        break;
      }
    }
    off += c.dim;
  }
  return val;
}

}  // namespace scbadmm
