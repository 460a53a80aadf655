#include "scbadmm/linops.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace scbadmm {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

int svec_dim(int n) { return n * (n + 1) / 2; }

int svec_order(int dim) {
  int n = static_cast<int>(std::floor((std::sqrt(8.0 * dim + 1.0) - 1.0) / 2.0));
  while (svec_dim(n) < dim) ++n;
  while (n > 0 && svec_dim(n) > dim) --n;
  if (svec_dim(n) != dim) throw std::invalid_argument("svec_order: not a triangular dimension");
  return n;
}

Vec svec(const Mat& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("svec: square matrix required");
  const int n = static_cast<int>(X.rows());
  Vec out(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      out[k++] = (i == j) ? X(i, j) : kSqrt2 * 0.5 * (X(i, j) + X(j, i));
  return out;
}

Mat smat(const Vec& x) {
  const int n = svec_order(static_cast<int>(x.size()));
  Mat X(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double v = x[k++];
      if (i == j) {
        X(i, j) = v;
      } else {
        X(i, j) = v / kSqrt2;
        X(j, i) = X(i, j);
      }
    }
  return X;
}

Vec svec_pattern(const Mat& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("svec_pattern: square matrix required");
  const int n = static_cast<int>(X.rows());
  Vec out(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) out[k++] = 0.5 * (X(i, j) + X(j, i));
  return out;
}

LinearMap LinearMap::identity(int n) {
  LinearMap m;
  m.dom_dim = m.cod_dim = n;
  m.apply = [](const Vec& x) { return x; };
  m.adjoint_apply = [](const Vec& x) { return x; };
  return m;
}

LinearMap LinearMap::scaled_identity(int n, double s) {
  LinearMap m;
  m.dom_dim = m.cod_dim = n;
  m.apply = [s](const Vec& x) { return Vec(s * x); };
  m.adjoint_apply = [s](const Vec& x) { return Vec(s * x); };
  return m;
}

LinearMap LinearMap::zero(int dom_dim, int cod_dim) {
  LinearMap m;
  m.dom_dim = dom_dim;
  m.cod_dim = cod_dim;
  m.apply = [cod_dim](const Vec&) { return Vec(Vec::Zero(cod_dim)); };
  m.adjoint_apply = [dom_dim](const Vec&) { return Vec(Vec::Zero(dom_dim)); };
  return m;
}

LinearMap LinearMap::from_matrix(const Mat& A) {
  auto M = std::make_shared<Mat>(A);
  LinearMap m;
  m.dom_dim = static_cast<int>(A.cols());
  m.cod_dim = static_cast<int>(A.rows());
  m.apply = [M](const Vec& x) { return Vec((*M) * x); };
  m.adjoint_apply = [M](const Vec& w) { return Vec(M->transpose() * w); };
  return m;
}

Mat LinearMap::to_dense() const {
  Mat M(cod_dim, dom_dim);
  Vec e = Vec::Zero(dom_dim);
  for (int j = 0; j < dom_dim; ++j) {
    e[j] = 1.0;
    M.col(j) = apply(e);
    e[j] = 0.0;
  }
  return M;
}

Mat LinearMap::adjoint_to_dense() const {
  Mat M(dom_dim, cod_dim);
  Vec e = Vec::Zero(cod_dim);
  for (int j = 0; j < cod_dim; ++j) {
    e[j] = 1.0;
    M.col(j) = adjoint_apply(e);
    e[j] = 0.0;
  }
  return M;
}

SelfAdjointPSDOp SelfAdjointPSDOp::zero(int dim) {
  SelfAdjointPSDOp s;
  s.form = Form::Zero;
  s.dim = dim;
  return s;
}

SelfAdjointPSDOp SelfAdjointPSDOp::scaled_identity(int dim, double sc) {
  SelfAdjointPSDOp s;
  s.form = Form::ScaledIdentity;
  s.dim = dim;
  s.scale = sc;
  return s;
}

SelfAdjointPSDOp SelfAdjointPSDOp::diagonal(Vec d) {
  SelfAdjointPSDOp s;
  s.form = Form::Diagonal;
  s.dim = static_cast<int>(d.size());
  s.diag = std::move(d);
  return s;
}

SelfAdjointPSDOp SelfAdjointPSDOp::from_dense(const Mat& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("SelfAdjointPSDOp: square matrix required");
  SelfAdjointPSDOp s;
  s.form = Form::Dense;
  s.dim = static_cast<int>(M.rows());
  s.dense = std::make_shared<Mat>(0.5 * (M + M.transpose()));
  return s;
}

SelfAdjointPSDOp SelfAdjointPSDOp::from_apply(int dim, std::function<Vec(const Vec&)> fn) {
  SelfAdjointPSDOp s;
  s.form = Form::Custom;
  s.dim = dim;
  s.custom = std::move(fn);
  return s;
}

Vec SelfAdjointPSDOp::apply(const Vec& x) const {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("SelfAdjointPSDOp::apply: dimension mismatch");
  switch (form) {
    case Form::Zero:
      return Vec::Zero(dim);
    case Form::ScaledIdentity:
      return scale * x;
    case Form::Diagonal:
      return diag.cwiseProduct(x);
    case Form::Dense:
      return (*dense) * x;
    case Form::Custom:
      return custom(x);
  }
  return Vec::Zero(dim);
}

Mat SelfAdjointPSDOp::to_dense() const {
  switch (form) {
    case Form::Zero:
      return Mat::Zero(dim, dim);
    case Form::ScaledIdentity:
      return scale * Mat::Identity(dim, dim);
    case Form::Diagonal:
      return Mat(diag.asDiagonal());
    case Form::Dense:
      return *dense;
    case Form::Custom: {
      Mat M(dim, dim);
      Vec e = Vec::Zero(dim);
      for (int j = 0; j < dim; ++j) {
        e[j] = 1.0;
        M.col(j) = custom(e);
        e[j] = 0.0;
      }
      return Mat(0.5 * (M + M.transpose()));
    }
  }
  return Mat::Zero(dim, dim);
}

Vec SelfAdjointPSDOp::resolve(double t, const Vec& rhs) const {
  switch (form) {
    case Form::Zero:
      return rhs;
    case Form::ScaledIdentity:
      return rhs / (1.0 + t * scale);
    case Form::Diagonal:
      return rhs.cwiseQuotient((1.0 + t * diag.array()).matrix());
    case Form::Dense:
    case Form::Custom: {
      if (!resolve_fact_ || resolve_t_ != t) {
        Mat M = Mat::Identity(dim, dim) + t * to_dense();
        resolve_fact_ = std::make_shared<Eigen::LDLT<Mat>>(M);
        resolve_t_ = t;
      }
      return resolve_fact_->solve(rhs);
    }
  }
  return rhs;
}

bool check_adjoint(const LinearMap& map, int trials) {
  if (trials < 1) throw std::invalid_argument("check_adjoint: trials must be >= 1");
  std::mt19937_64 rng(20140523u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec x(map.dom_dim), w(map.cod_dim);
    for (int i = 0; i < map.dom_dim; ++i) x[i] = gauss(rng);
    for (int i = 0; i < map.cod_dim; ++i) w[i] = gauss(rng);
    Vec Ax = map.apply(x);
    Vec Aw = map.adjoint_apply(w);
    if (static_cast<int>(Ax.size()) != map.cod_dim || static_cast<int>(Aw.size()) != map.dom_dim)
      throw std::invalid_argument("check_adjoint: operator output dimension mismatch");
    const double lhs = Ax.dot(w);
    const double rhs = x.dot(Aw);
    const double scale = 1.0 + std::abs(lhs) + std::abs(rhs) + x.norm() * w.norm();
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst <= 1e-10;
}

double power_iteration(const std::function<Vec(const Vec&)>& apply, int dim,
                       int max_iter, double tol) {
  std::mt19937_64 rng(97531u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = apply(v);
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw <= 1e-300) return 0.0;
    v = w / nw;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::max(lambda, 0.0);
}

Mat gram_dense(const LinearMap& A) {
  Mat M(A.cod_dim, A.cod_dim);
  Vec e = Vec::Zero(A.cod_dim);
  for (int j = 0; j < A.cod_dim; ++j) {
    e[j] = 1.0;
    M.col(j) = A.apply(A.adjoint_apply(e));
    e[j] = 0.0;
  }
  return Mat(0.5 * (M + M.transpose()));
}

Majorizer build_majorizer(double sigma, const SelfAdjointPSDOp& Sigma,
                          const LinearMap& A, MajorizerStrategy strategy) {
  if (sigma <= 0.0) throw std::invalid_argument("build_majorizer: sigma must be positive");
  if (Sigma.dim != A.cod_dim) throw std::invalid_argument("build_majorizer: Sigma/A dimension mismatch");
  const int dim = Sigma.dim;
  const double inv_sigma = 1.0 / sigma;

  auto apply_M = [&Sigma, &A, inv_sigma](const Vec& x) {
    Vec out = inv_sigma * Sigma.apply(x);
    out += A.apply(A.adjoint_apply(x));
    return out;
  };

  Majorizer maj;
  maj.dim = dim;
  SelfAdjointPSDOp Sig = Sigma;
  LinearMap Amap = A;

  if (strategy == MajorizerStrategy::Exact) {
    Mat M = inv_sigma * Sigma.to_dense() + gram_dense(A);
    {
      Eigen::SelfAdjointEigenSolver<Mat> es(Sigma.to_dense(), Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      if (lo < -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff()))
        throw std::invalid_argument("build_majorizer: Sigma is not positive semidefinite");
    }
    const double eps = 1e-12 * (1.0 + M.diagonal().cwiseAbs().mean());
    auto E = std::make_shared<Mat>(M + eps * Mat::Identity(dim, dim));
    auto fact = std::make_shared<Eigen::LDLT<Mat>>(*E);
    maj.apply_E = [E](const Vec& x) { return Vec((*E) * x); };
    maj.solve = [fact](const Vec& r) { return Vec(fact->solve(r)); };
    maj.apply_T = [dim, eps](const Vec& x) { return Vec(eps * x); };
  } else {
    std::mt19937_64 rng(424242u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 8; ++t) {
      Vec x(dim);
      for (int i = 0; i < dim; ++i) x[i] = gauss(rng);
      const double q = x.dot(Sigma.apply(x));
      if (q < -1e-10 * x.squaredNorm() * (1.0 + std::abs(q)))
        throw std::invalid_argument("build_majorizer: Sigma is not positive semidefinite");
    }
    double lambda = 1.001 * power_iteration(apply_M, dim);
    lambda = std::max(lambda, 1e-12);
    maj.apply_E = [lambda](const Vec& x) { return Vec(lambda * x); };
    maj.solve = [lambda](const Vec& r) { return Vec(r / lambda); };
    maj.apply_T = [lambda, Sig, Amap, inv_sigma](const Vec& x) {
      Vec out = lambda * x;
      out -= inv_sigma * Sig.apply(x);
      out -= Amap.apply(Amap.adjoint_apply(x));
      return out;
    };
  }
  return maj;
}

LinearMap stack_maps(const std::vector<LinearMap>& maps) {
  if (maps.empty()) throw std::invalid_argument("stack_maps: empty list");
  const int dom = maps.front().dom_dim;
  int cod = 0;
  for (const auto& m : maps) {
    if (m.dom_dim != dom) throw std::invalid_argument("stack_maps: domain dimensions differ");
    cod += m.cod_dim;
  }
  auto parts = std::make_shared<std::vector<LinearMap>>(maps);
  LinearMap out;
  out.dom_dim = dom;
  out.cod_dim = cod;
  out.apply = [parts, cod](const Vec& x) {
    Vec y(cod);
    int off = 0;
    for (const auto& m : *parts) {
      y.segment(off, m.cod_dim) = m.apply(x);
      off += m.cod_dim;
    }
    return y;
  };
  out.adjoint_apply = [parts, dom](const Vec& w) {
    Vec x = Vec::Zero(dom);
    int off = 0;
    for (const auto& m : *parts) {
      x += m.adjoint_apply(w.segment(off, m.cod_dim));
      off += m.cod_dim;
    }
    return x;
  };
  return out;
}

}  // namespace scbadmm
