#include "scbadmm/instances.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace scbadmm {

namespace {

Mat random_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = dist(rng);
  return M;
}

Mat random_orthogonal(int n, std::mt19937_64& rng) {
  const Mat A = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(A);
  Mat Q = qr.householderQ();
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

// x -> svec(P^T smat(x) P); its adjoint conjugates the other way.
LinearMap rotation_map(const Mat& P) {
  const int sd = svec_dim(static_cast<int>(P.rows()));
  LinearMap m;
  m.dom_dim = m.cod_dim = sd;
  m.apply = [P](const Vec& x) { return svec(Mat(P.transpose() * smat(x) * P)); };
  m.adjoint_apply = [P](const Vec& w) { return svec(Mat(P * smat(w) * P.transpose())); };
  return m;
}

Majorizer diagonal_majorizer(Vec d) {
  for (int i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0)) throw std::invalid_argument("diagonal_majorizer: nonpositive entry");
  Majorizer m;
  m.dim = static_cast<int>(d.size());
  m.apply_E = [d](const Vec& x) { return Vec(d.cwiseProduct(x)); };
  m.solve = [d](const Vec& r) { return Vec(r.cwiseQuotient(d)); };
  m.apply_T = [n = static_cast<int>(d.size())](const Vec&) { return Vec(Vec::Zero(n)); };
  return m;
}

double finite_gap(double oP, double oD) {
  if (!std::isfinite(oP) || !std::isfinite(oD)) return std::numeric_limits<double>::quiet_NaN();
  return (oP - oD) / (1.0 + std::abs(oP) + std::abs(oD));
}

}  // namespace

BuiltInstance assemble_qsdp_dual(std::string name, int n, const Vec& C, const LinearMap& A_E,
                                 const Vec& b_E, const BoxParams& K, const LinearMap* calB,
                                 std::function<Majorizer(double)> xi_majorizer,
                                 double obj_constant) {
  const int sd = svec_dim(n);
  if (C.size() != sd) throw std::invalid_argument("assemble_qsdp_dual: C dimension");
  if (A_E.dom_dim != sd || A_E.cod_dim != b_E.size())
    throw std::invalid_argument("assemble_qsdp_dual: A_E dimensions");
  if (A_E.cod_dim > 0 && !check_adjoint(A_E, 8))
    throw std::invalid_argument("assemble_qsdp_dual: A_E adjoint check failed");
  if (calB && !check_adjoint(*calB, 8))
    throw std::invalid_argument("assemble_qsdp_dual: calB adjoint check failed");

  BuiltInstance out;
  out.name = std::move(name);
  out.obj_constant = obj_constant;

  BlockProblem pb;
  pb.c = C;
  pb.f.fn = ProxFriendlyFunction::single(ProxComponent::box_support(K));
  pb.f.map = LinearMap::identity(sd);
  const bool has_xi = calB != nullptr;
  const bool has_y = b_E.size() > 0;
  if (has_xi) {
    QuadraticBlock xi;
    xi.P = SelfAdjointPSDOp::scaled_identity(sd, 1.0);
    xi.b = Vec::Zero(sd);
    xi.A = *calB;
    xi.majorizer_factory = std::move(xi_majorizer);
    pb.theta.push_back(std::move(xi));
  }
  if (has_y) {
    QuadraticBlock ye;
    ye.P = SelfAdjointPSDOp::zero(static_cast<int>(b_E.size()));
    ye.b = b_E;
    ye.A = A_E;
    pb.theta.push_back(std::move(ye));
  }
  pb.g.fn = ProxFriendlyFunction::single(ProxComponent::psd(n));
  pb.g.map = LinearMap::identity(sd);
  out.problem = std::move(pb);

  QsdpKkt kkt;
  kkt.n = n;
  kkt.A_E = A_E;
  kkt.b_E = b_E;
  kkt.C = C;
  kkt.K = K;
  if (has_xi) {
    kkt.xi_dim = sd;
    kkt.Bstar = [B = *calB](const Vec& xi) { return B.adjoint_apply(xi); };
  }
  out.residual = [kkt, has_xi, has_y](const BlockProblem& p2, const IterateState& st,
                                      bool with_gap) {
    const Vec xi = has_xi ? st.y[0] : Vec();
    const Vec yE = has_y ? st.y[has_xi ? 1 : 0] : Vec();
    ResidualReport r = eta_qsdp(kkt, st.x, st.u, xi, st.v, yE);
    if (with_gap) {
      auto [oP, oD] = objective_values(p2, st);
      r.obj_P = oP;
      r.obj_D = oD;
      r.eta_gap = finite_gap(oP, oD);
    }
    return r;
  };
  out.primal_X = [](const IterateState& st) { return st.x; };
  return out;
}

QsdpInstance make_random_qsdp_data(int n, int m_E, int rank_B, unsigned long long seed) {
  if (n < 1 || m_E < 0 || rank_B < 0 || rank_B > n)
    throw std::invalid_argument("make_random_qsdp_data: bad sizes");
  const int sd = svec_dim(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  QsdpInstance inst;
  inst.n = n;
  inst.seed = seed;
  inst.K = BoxParams::matrix_uniform(n, 0.0, kInf);
  inst.Pfac = random_orthogonal(n, rng);
  inst.lambda = Vec::Zero(n);
  for (int i = 0; i < rank_B; ++i) inst.lambda[i] = 0.1 + unif(rng);
  inst.H = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inst.H(i, j) = std::sqrt(0.5 * (inst.lambda[i] + inst.lambda[j]));

  const Vec h2 = svec_pattern(Mat(inst.H.cwiseProduct(inst.H)));
  const LinearMap rot = rotation_map(inst.Pfac);
  inst.Q = SelfAdjointPSDOp::from_apply(sd, [rot, h2](const Vec& x) {
    return rot.adjoint_apply(Vec(h2.cwiseProduct(rot.apply(x))));
  });

  Mat AE(m_E, sd);
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < m_E; ++i)
      for (int j = 0; j < sd; ++j) AE(i, j) = gauss(rng);
    // Unit rows keep A_E A_E* on the same scale as the identity couplings of
    // the Z and S blocks.
    for (int i = 0; i < m_E; ++i) AE.row(i) /= AE.row(i).norm();
  }
  inst.A_E = LinearMap::from_matrix(AE);

  // Primal-dual pair satisfying the full KKT system: X* = V V^T with positive
  // factor entries (entrywise positive, so the K-multiplier Z* vanishes),
  // rank-deficient so the PSD multiplier S* lives on its null space, and
  // C = B*(-B X*) + S* + A_E* y*.
  const int r = std::max(1, n - 3);
  Mat V(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) V(i, j) = (0.1 + 0.9 * unif(rng)) / std::sqrt(double(r));
  const Mat Xs = V * V.transpose();
  inst.X_feas = svec(Xs);
  inst.b_E = inst.A_E.apply(*inst.X_feas);

  Mat Ss = Mat::Zero(n, n);
  if (r < n) {
    Eigen::FullPivLU<Mat> lu(V.transpose());
    const Mat U = lu.kernel();  // n x (n - r), spans null(X*)
    Mat D = Mat::Zero(U.cols(), U.cols());
    for (int j = 0; j < U.cols(); ++j) D(j, j) = 0.5 + unif(rng);
    Ss = U * D * U.transpose();
  }
  Vec ys(m_E);
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = 0; j < m_E; ++j) ys[j] = gauss(rng);
  }
  inst.C = -inst.Q.apply(*inst.X_feas) + svec(Ss) + inst.A_E.adjoint_apply(ys);
  return inst;
}

BuiltInstance build_random_qsdp(int n, int m_E, int rank_B, unsigned long long seed) {
  const QsdpInstance inst = make_random_qsdp_data(n, m_E, rank_B, seed);
  const Vec h = svec_pattern(inst.H);
  const LinearMap rot = rotation_map(inst.Pfac);
  LinearMap calB;
  calB.dom_dim = calB.cod_dim = svec_dim(n);
  calB.apply = [rot, h](const Vec& x) { return Vec(h.cwiseProduct(rot.apply(x))); };
  calB.adjoint_apply = [rot, h](const Vec& w) { return rot.adjoint_apply(Vec(h.cwiseProduct(w))); };
  std::function<Majorizer(double)> xi_maj;
  if (rank_B > 0)
    xi_maj = [h](double sigma) {
      return diagonal_majorizer(Vec(h.cwiseProduct(h).array() + 1.0 / sigma));
    };
  std::ostringstream nm;
  nm << "qsdp_n" << n << "_m" << m_E << "_r" << rank_B << "_s" << seed;
  return assemble_qsdp_dual(nm.str(), n, inst.C, inst.A_E, inst.b_E, inst.K,
                            rank_B > 0 ? &calB : nullptr, xi_maj);
}

BuiltInstance build_scalar_qsdp() {
  const BoxParams K = BoxParams::uniform(1, -kInf, kInf);
  const LinearMap calB = LinearMap::identity(1);
  auto xi_maj = [](double sigma) {
    return diagonal_majorizer(Vec(Vec::Constant(1, 1.0 + 1.0 / sigma)));
  };
  Vec C(1);
  C[0] = -1.0;
  return assemble_qsdp_dual("qsdp_scalar", 1, C, LinearMap::zero(1, 0), Vec(), K, &calB, xi_maj);
}

QsdpInstance make_biq_data(const Eigen::SparseMatrix<double>& Q_data, const Vec& c_data,
                           int rank_B, unsigned long long seed) {
  const int n0 = static_cast<int>(Q_data.rows());
  if (n0 < 1 || Q_data.cols() != n0) throw std::invalid_argument("make_biq_data: bad order");
  if (c_data.size() != n0) throw std::invalid_argument("make_biq_data: cost length");
  const Mat Qd = Mat(Q_data);
  if ((Qd - Qd.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Qd.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("make_biq_data: Q_data is not symmetric");
  const int n = n0 + 1;
  const int sd = svec_dim(n);
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  QsdpInstance inst;
  inst.n = n;
  inst.seed = seed;
  inst.K = BoxParams::matrix_uniform(n, 0.0, kInf);

  inst.Pfac = random_orthogonal(n, rng);
  inst.lambda = Vec::Zero(n);
  for (int i = 0; i < rank_B && i < n; ++i) inst.lambda[i] = 0.1 + unif(rng);
  inst.H = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inst.H(i, j) = std::sqrt(0.5 * (inst.lambda[i] + inst.lambda[j]));
  const Vec h2 = svec_pattern(Mat(inst.H.cwiseProduct(inst.H)));
  const LinearMap rot = rotation_map(inst.Pfac);
  inst.Q = SelfAdjointPSDOp::from_apply(sd, [rot, h2](const Vec& x) {
    return rot.adjoint_apply(Vec(h2.cwiseProduct(rot.apply(x))));
  });

  Mat Cmat = Mat::Zero(n, n);
  Cmat.topLeftCorner(n0, n0) = 0.5 * Qd;
  Cmat.block(0, n0, n0, 1) = 0.5 * c_data;
  Cmat.block(n0, 0, 1, n0) = 0.5 * c_data.transpose();
  inst.C = svec(Cmat);

  // Rows <M_i, X> = 0 for M_i = E_ii - sym(E_{i,n}) (diagonal extraction) and
  // <E_nn, X> = 1 (corner fix).
  Mat AE = Mat::Zero(n0 + 1, sd);
  for (int i = 0; i < n0; ++i) {
    Mat M = Mat::Zero(n, n);
    M(i, i) = 1.0;
    M(i, n0) = M(n0, i) = -0.5;
    AE.row(i) = svec(M).transpose();
  }
  {
    Mat M = Mat::Zero(n, n);
    M(n0, n0) = 1.0;
    AE.row(n0) = svec(M).transpose();
  }
  inst.A_E = LinearMap::from_matrix(AE);
  inst.b_E = Vec::Zero(n0 + 1);
  inst.b_E[n0] = 1.0;

  Mat Xf(n, n);
  Xf.topLeftCorner(n0, n0) = Mat::Constant(n0, n0, 0.25);
  Xf.topLeftCorner(n0, n0).diagonal().array() = 0.5;
  Xf.block(0, n0, n0, 1).setConstant(0.5);
  Xf.block(n0, 0, 1, n0).setConstant(0.5);
  Xf(n0, n0) = 1.0;
  inst.X_feas = svec(Xf);
  return inst;
}

BuiltInstance build_biq(const Eigen::SparseMatrix<double>& Q_data, const Vec& c_data,
                        int rank_B, unsigned long long seed) {
  const QsdpInstance inst = make_biq_data(Q_data, c_data, rank_B, seed);
  const int n = inst.n;
  const Vec h = svec_pattern(inst.H);
  const LinearMap rot = rotation_map(inst.Pfac);
  LinearMap calB;
  calB.dom_dim = calB.cod_dim = svec_dim(n);
  calB.apply = [rot, h](const Vec& x) { return Vec(h.cwiseProduct(rot.apply(x))); };
  calB.adjoint_apply = [rot, h](const Vec& w) { return rot.adjoint_apply(Vec(h.cwiseProduct(w))); };
  std::function<Majorizer(double)> xi_maj;
  if (rank_B > 0)
    xi_maj = [h](double sigma) {
      return diagonal_majorizer(Vec(h.cwiseProduct(h).array() + 1.0 / sigma));
    };
  std::ostringstream nm;
  nm << "biq_n" << (n - 1) << "_r" << rank_B << "_s" << seed;
  return assemble_qsdp_dual(nm.str(), n, inst.C, inst.A_E, inst.b_E, inst.K,
                            rank_B > 0 ? &calB : nullptr, xi_maj);
}

Mat synthetic_h0(int order, unsigned long long seed) {
  std::mt19937_64 rng(seed ^ 0xabcdef1234567ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat H0(order, order);
  const double lo = std::log(2.0), hi = std::log(1.28e3);
  for (int i = 0; i < order; ++i)
    for (int j = i; j < order; ++j) {
      const double v = (unif(rng) < 0.24) ? 1e-5 : std::exp(lo + (hi - lo) * unif(rng));
      H0(i, j) = H0(j, i) = v;
    }
  return H0;
}

namespace {

LinearMap diag_extraction_map(int n) {
  const int sd = svec_dim(n);
  Mat AE = Mat::Zero(n, sd);
  for (int i = 0; i < n; ++i) {
    Mat M = Mat::Zero(n, n);
    M(i, i) = 1.0;
    AE.row(i) = svec(M).transpose();
  }
  return LinearMap::from_matrix(AE);
}

}  // namespace

NcmInstance make_ncm_data(int n, double alpha, NormKind kind, unsigned long long seed) {
  if (n < 1) throw std::invalid_argument("make_ncm_data: n >= 1 required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("make_ncm_data: alpha in (0,1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  // Synthetic correlation matrix: normalized random Gram matrix.
  const int k = std::max(2, n / 2);
  const Mat W = random_gaussian(n, k, rng);
  Mat Ghat = W * W.transpose();
  Ghat.diagonal().array() += 0.1;
  const Vec d = Ghat.diagonal().cwiseSqrt();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Ghat(i, j) /= d[i] * d[j];

  Mat E(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) E(i, j) = E(j, i) = unif(rng);

  NcmInstance inst;
  inst.n = n;
  inst.norm_kind = kind;
  inst.seed = seed;
  inst.G = (1.0 - alpha) * Ghat + alpha * E;
  inst.G.diagonal().setOnes();

  const int block = 25;
  const Mat H0 = synthetic_h0(block, seed);
  inst.H = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inst.H(i, j) = H0(i % block, j % block);
  inst.H = 0.5 * (inst.H + inst.H.transpose()).eval();

  inst.A_E = diag_extraction_map(n);
  inst.b_E = Vec::Ones(n);
  inst.K = BoxParams::matrix_uniform(n, -0.5, kInf);
  return inst;
}

BuiltInstance build_ncm_custom(const Mat& G, const Mat& H, const BoxParams& K, NormKind kind,
                               std::string name, bool diag_constraint) {
  const int n = static_cast<int>(G.rows());
  const int sd = svec_dim(n);
  if (H.rows() != n || H.cols() != n) throw std::invalid_argument("build_ncm_custom: H order");
  if (H.minCoeff() < 0.0) throw std::invalid_argument("build_ncm_custom: H must be nonnegative");
  const LinearMap A_E = diag_constraint ? diag_extraction_map(n) : LinearMap::zero(sd, 0);
  const Vec b_E = diag_constraint ? Vec(Vec::Ones(n)) : Vec();
  const Vec h = svec_pattern(H);

  if (kind == NormKind::Frobenius) {
    // (1/2)||H o (X - G)||^2 = (1/2)<X, (HoHo)X> - <HoHoG, X> + const.
    const Mat HHG = H.cwiseProduct(H).cwiseProduct(G);
    const Vec C = -svec(HHG);
    LinearMap calB;
    calB.dom_dim = calB.cod_dim = sd;
    calB.apply = [h](const Vec& x) { return Vec(h.cwiseProduct(x)); };
    calB.adjoint_apply = [h](const Vec& w) { return Vec(h.cwiseProduct(w)); };
    auto xi_maj = [h](double sigma) {
      return diagonal_majorizer(Vec(h.cwiseProduct(h).array() + 1.0 / sigma));
    };
    const double cst = 0.5 * H.cwiseProduct(G).squaredNorm();
    return assemble_qsdp_dual(std::move(name), n, C, A_E, b_E, K, &calB, xi_maj, cst);
  }

  // Spectral norm: 5-block dual over x = (x1, x2) with the splitting row
  // Gamma - Xi = 0.  Blocks: (Z, Gamma) box-support + nuclear ball, Xi linear
  // with coupling H o x1 - x2, y_E, S.
  const bool has_y = diag_constraint;
  BuiltInstance out;
  out.name = std::move(name);
  BlockProblem pb;
  pb.c = Vec::Zero(2 * sd);
  pb.f.fn = ProxFriendlyFunction::product(
      {ProxComponent::box_support(K), ProxComponent::nuclear_ball(n, 1.0)});
  pb.f.map = LinearMap::identity(2 * sd);
  {
    QuadraticBlock xi;
    xi.P = SelfAdjointPSDOp::zero(sd);
    xi.b = svec(Mat(H.cwiseProduct(G)));
    xi.A.dom_dim = 2 * sd;
    xi.A.cod_dim = sd;
    xi.A.apply = [h, sd](const Vec& x) {
      return Vec(h.cwiseProduct(x.head(sd)) - x.tail(sd));
    };
    xi.A.adjoint_apply = [h, sd](const Vec& w) {
      Vec out2(2 * sd);
      out2.head(sd) = h.cwiseProduct(w);
      out2.tail(sd) = -w;
      return out2;
    };
    xi.majorizer_factory = [h](double) {
      return diagonal_majorizer(Vec(h.cwiseProduct(h).array() + 1.0));
    };
    pb.theta.push_back(std::move(xi));
  }
  if (has_y) {
    QuadraticBlock ye;
    ye.P = SelfAdjointPSDOp::zero(n);
    ye.b = b_E;
    ye.A.dom_dim = 2 * sd;
    ye.A.cod_dim = n;
    ye.A.apply = [A_E, sd](const Vec& x) { return A_E.apply(Vec(x.head(sd))); };
    ye.A.adjoint_apply = [A_E, sd](const Vec& w) {
      Vec out2 = Vec::Zero(2 * sd);
      out2.head(sd) = A_E.adjoint_apply(w);
      return out2;
    };
    pb.theta.push_back(std::move(ye));
  }
  pb.g.fn = ProxFriendlyFunction::single(ProxComponent::psd(n));
  pb.g.map.dom_dim = 2 * sd;
  pb.g.map.cod_dim = sd;
  pb.g.map.apply = [sd](const Vec& x) { return Vec(x.head(sd)); };
  pb.g.map.adjoint_apply = [sd](const Vec& w) {
    Vec out2 = Vec::Zero(2 * sd);
    out2.head(sd) = w;
    return out2;
  };
  out.problem = std::move(pb);

  SncmKkt kkt;
  kkt.n = n;
  kkt.A_E = A_E;
  kkt.b_E = b_E;
  kkt.C = Vec::Zero(sd);
  kkt.H = h;
  kkt.G = svec(G);
  kkt.K = K;
  out.residual = [kkt, sd, has_y](const BlockProblem& p2, const IterateState& st, bool with_gap) {
    const Vec X = st.x.head(sd);
    const Vec Z = st.u.head(sd);
    const Vec Gam = st.u.tail(sd);
    const Vec yE = has_y ? st.y[1] : Vec();
    ResidualReport r = eta_sncm(kkt, X, Z, st.y[0], Gam, st.v, yE);
    if (with_gap) {
      auto [oP, oD] = objective_values(p2, st);
      r.obj_P = oP;
      r.obj_D = oD;
      r.eta_gap = finite_gap(oP, oD);
    }
    return r;
  };
  out.primal_X = [sd](const IterateState& st) { return Vec(st.x.head(sd)); };
  return out;
}

BuiltInstance build_ncm(int n, double alpha, NormKind kind, unsigned long long seed) {
  const NcmInstance inst = make_ncm_data(n, alpha, kind, seed);
  std::ostringstream nm;
  nm << "ncm_" << (kind == NormKind::Frobenius ? "fro" : "spec") << "_n" << n << "_a" << alpha
     << "_s" << seed;
  return build_ncm_custom(inst.G, inst.H, inst.K, kind, nm.str(), true);
}

SparseInstanceData load_sparse_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_sparse_instance: cannot open " + path);
  auto fail = [&](long line, const std::string& what) {
    std::ostringstream os;
    os << "load_sparse_instance: " << path << ":" << line << ": " << what;
    throw std::runtime_error(os.str());
  };

  std::vector<std::string> tokens;
  std::vector<long> token_lines;
  std::string raw;
  long lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tok;
    while (ls >> tok) {
      tokens.push_back(tok);
      token_lines.push_back(lineno);
    }
  }
  size_t pos = 0;
  auto next = [&](const char* what) -> std::string {
    if (pos >= tokens.size()) fail(lineno, std::string("unexpected end of file, expected ") + what);
    return tokens[pos++];
  };
  auto as_long = [&](const std::string& t, const char* what) -> long {
    size_t used = 0;
    long v = 0;
    try {
      v = std::stol(t, &used);
    } catch (...) {
      used = 0;
    }
    if (used != t.size()) fail(token_lines[pos - 1], std::string("bad ") + what + " '" + t + "'");
    return v;
  };
  auto as_double = [&](const std::string& t, const char* what) -> double {
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (...) {
      used = 0;
    }
    if (used != t.size()) fail(token_lines[pos - 1], std::string("bad ") + what + " '" + t + "'");
    return v;
  };

  SparseInstanceData data;
  const long n = as_long(next("matrix order"), "matrix order");
  const long nnz = as_long(next("triplet count"), "triplet count");
  if (n < 1) fail(token_lines[0], "matrix order must be positive");
  if (nnz < 0) fail(token_lines[0], "negative triplet count");
  data.n = static_cast<int>(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(2 * nnz));
  for (long t = 0; t < nnz; ++t) {
    const long i = as_long(next("row index"), "row index");
    const long j = as_long(next("column index"), "column index");
    const double v = as_double(next("value"), "value");
    if (i < 1 || i > n || j < 1 || j > n) fail(token_lines[pos - 1], "index out of range");
    trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (i != j) trips.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
  }
  data.Q.resize(data.n, data.n);
  data.Q.setFromTriplets(trips.begin(), trips.end());
  data.c = Vec::Zero(data.n);
  if (pos < tokens.size()) {
    if (tokens[pos] != "c") fail(token_lines[pos], "expected 'c' section, got '" + tokens[pos] + "'");
    ++pos;
    for (int i = 0; i < data.n; ++i) data.c[i] = as_double(next("cost value"), "cost value");
    if (pos != tokens.size()) fail(token_lines[pos], "trailing tokens after cost section");
  }
  return data;
}

void write_sparse_instance(const std::string& path, const Eigen::SparseMatrix<double>& Q,
                           const Vec& c) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("write_sparse_instance: square required");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sparse_instance: cannot open " + path);
  std::vector<std::tuple<int, int, double>> trips;
  for (int k = 0; k < Q.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it)
      if (it.row() <= it.col() && it.value() != 0.0)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  out.precision(17);
  out << Q.rows() << " " << trips.size() << "\n";
  for (const auto& [i, j, v] : trips) out << (i + 1) << " " << (j + 1) << " " << v << "\n";
  if (c.size() > 0 && c.cwiseAbs().maxCoeff() > 0.0) {
    out << "c";
    for (int i = 0; i < c.size(); ++i) out << " " << c[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_sparse_instance: write failed");
}

}  // namespace scbadmm
