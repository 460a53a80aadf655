#include "scbadmm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace scbadmm {

void BlockProblem::validate() const {
  const int m = x_dim();
  auto check_map = [m](const LinearMap& a, const char* who) {
    if (a.dom_dim != m) throw std::invalid_argument(std::string(who) + ": coupling map domain mismatch");
  };
  check_map(f.map, "f");
  check_map(g.map, "g");
  if (f.fn.dim() != f.map.cod_dim) throw std::invalid_argument("f: function/map dimension mismatch");
  if (g.fn.dim() != g.map.cod_dim) throw std::invalid_argument("g: function/map dimension mismatch");
  for (const auto& t : theta) {
    check_map(t.A, "theta");
    if (t.P.dim != t.A.cod_dim || t.b.size() != t.A.cod_dim)
      throw std::invalid_argument("theta: block dimension mismatch");
  }
  for (const auto& t : phi) {
    check_map(t.A, "phi");
    if (t.P.dim != t.A.cod_dim || t.b.size() != t.A.cod_dim)
      throw std::invalid_argument("phi: block dimension mismatch");
  }
}

IterateState IterateState::zeros(const BlockProblem& pb) {
  IterateState s;
  s.u = Vec::Zero(pb.f.fn.dim());
  s.v = Vec::Zero(pb.g.fn.dim());
  s.x = Vec::Zero(pb.x_dim());
  for (const auto& t : pb.theta) s.y.push_back(Vec::Zero(t.b.size()));
  for (const auto& t : pb.phi) s.z.push_back(Vec::Zero(t.b.size()));
  return s;
}

Vec constraint_residual(const BlockProblem& pb, const IterateState& s) {
  if (static_cast<int>(s.u.size()) != pb.f.fn.dim() || static_cast<int>(s.v.size()) != pb.g.fn.dim() ||
      s.y.size() != pb.theta.size() || s.z.size() != pb.phi.size())
    throw std::invalid_argument("constraint_residual: state/problem mismatch");
  Vec r = pb.f.map.adjoint_apply(s.u) + pb.g.map.adjoint_apply(s.v) - pb.c;
  for (size_t i = 0; i < pb.theta.size(); ++i) r += pb.theta[i].A.adjoint_apply(s.y[i]);
  for (size_t j = 0; j < pb.phi.size(); ++j) r += pb.phi[j].A.adjoint_apply(s.z[j]);
  return r;
}

double quadratic_block_value(const QuadraticBlock& blk, const Vec& y) {
  return 0.5 * y.dot(blk.P.apply(y)) - blk.b.dot(y);
}

double quadratic_block_conj(const QuadraticBlock& blk, const Vec& r) {
  const Vec rhs = r + blk.b;
  switch (blk.P.form) {
    case SelfAdjointPSDOp::Form::Zero:
      return rhs.norm() <= 1e-8 * (1.0 + r.norm() + blk.b.norm()) ? 0.0 : kInf;
    case SelfAdjointPSDOp::Form::ScaledIdentity:
      if (blk.P.scale <= 0.0)
        return rhs.norm() <= 1e-8 * (1.0 + r.norm() + blk.b.norm()) ? 0.0 : kInf;
      return 0.5 * rhs.squaredNorm() / blk.P.scale;
    case SelfAdjointPSDOp::Form::Diagonal: {
      double val = 0.0;
      const double cut = 1e-12 * std::max(1.0, blk.P.diag.maxCoeff());
      for (int i = 0; i < rhs.size(); ++i) {
        if (blk.P.diag[i] > cut)
          val += 0.5 * rhs[i] * rhs[i] / blk.P.diag[i];
        else if (std::abs(rhs[i]) > 1e-8 * (1.0 + rhs.norm()))
          return kInf;
      }
      return val;
    }
    default: {
      Eigen::SelfAdjointEigenSolver<Mat> es(blk.P.to_dense());
      const Vec d = es.eigenvalues();
      const Vec rr = es.eigenvectors().transpose() * rhs;
      const double cut = 1e-12 * std::max(1.0, d.maxCoeff());
      double val = 0.0;
      double off_range = 0.0;
      for (int i = 0; i < rr.size(); ++i) {
        if (d[i] > cut)
          val += 0.5 * rr[i] * rr[i] / d[i];
        else
          off_range += rr[i] * rr[i];
      }
      if (std::sqrt(off_range) > 1e-8 * (1.0 + rhs.norm())) return kInf;
      return val;
    }
  }
}

std::pair<double, double> objective_values(const BlockProblem& pb, const IterateState& s) {
  double obj_p = pb.f.fn.eval(s.u) + pb.g.fn.eval(s.v);
  for (size_t i = 0; i < pb.theta.size(); ++i) obj_p += quadratic_block_value(pb.theta[i], s.y[i]);
  for (size_t j = 0; j < pb.phi.size(); ++j) obj_p += quadratic_block_value(pb.phi[j], s.z[j]);

  double dual_min_form = pb.c.dot(s.x);
  dual_min_form += pb.f.fn.conj(Vec(-pb.f.map.apply(s.x)));
  dual_min_form += pb.g.fn.conj(Vec(-pb.g.map.apply(s.x)));
  for (const auto& t : pb.theta) dual_min_form += quadratic_block_conj(t, Vec(-t.A.apply(s.x)));
  for (const auto& t : pb.phi) dual_min_form += quadratic_block_conj(t, Vec(-t.A.apply(s.x)));
  return {obj_p, -dual_min_form};
}

namespace {

LinearMap extend_first(const LinearMap& m, int extra) {
  LinearMap out;
  out.dom_dim = m.dom_dim + extra;
  out.cod_dim = m.cod_dim;
  const int base = m.dom_dim;
  out.apply = [m, base](const Vec& x) { return m.apply(x.head(base)); };
  out.adjoint_apply = [m, base, extra](const Vec& w) {
    Vec r = Vec::Zero(base + extra);
    r.head(base) = m.adjoint_apply(w);
    return r;
  };
  return out;
}

}  // namespace

BlockProblem reformulate_inequalities(const BlockProblem& pb, std::optional<int> index,
                                      const LinearMap& D) {
  if (!index.has_value()) return pb;
  const int idx = *index;
  if (idx < 0 || idx >= pb.p()) throw std::invalid_argument("reformulate_inequalities: index out of range");
  if (D.dom_dim != D.cod_dim) throw std::invalid_argument("reformulate_inequalities: D must be square");
  const int mi = D.dom_dim;
  if (mi != static_cast<int>(pb.theta[idx].b.size()))
    throw std::invalid_argument("reformulate_inequalities: D/block dimension mismatch");
  {
    Eigen::FullPivLU<Mat> lu(D.to_dense());
    if (!lu.isInvertible()) throw std::invalid_argument("reformulate_inequalities: D is singular");
  }

  const int m = pb.x_dim();
  BlockProblem out;
  out.c = Vec::Zero(m + mi);
  out.c.head(m) = pb.c;

  // f picks up the nonnegative slack; its map writes D* u_I into the new row.
  out.f.fn = pb.f.fn;
  out.f.fn.comps.push_back(ProxComponent::nonneg(mi));
  {
    const LinearMap base = extend_first(pb.f.map, mi);
    const int du = pb.f.fn.dim();
    LinearMap fm;
    fm.dom_dim = m + mi;
    fm.cod_dim = du + mi;
    fm.apply = [base, D, m, du](const Vec& x) {
      Vec r(du + static_cast<int>(x.size()) - m);
      r.head(du) = base.apply(x);
      r.tail(x.size() - m) = D.apply(x.tail(x.size() - m));
      return r;
    };
    fm.adjoint_apply = [base, D, m, du, mi](const Vec& w) {
      Vec r = base.adjoint_apply(w.head(du));
      r.tail(mi) += D.adjoint_apply(w.tail(mi));
      return r;
    };
    out.f.map = fm;
  }

  out.g.fn = pb.g.fn;
  out.g.map = extend_first(pb.g.map, mi);
  for (int k = 0; k < pb.p(); ++k) {
    QuadraticBlock blk = pb.theta[k];
    if (k == idx) {
      const LinearMap A = pb.theta[k].A;
      LinearMap am;
      am.dom_dim = m + mi;
      am.cod_dim = A.cod_dim;
      am.apply = [A, D, m](const Vec& x) {
        return Vec(A.apply(x.head(m)) - D.apply(x.tail(x.size() - m)));
      };
      am.adjoint_apply = [A, D, m, mi](const Vec& w) {
        Vec r = Vec::Zero(m + mi);
        r.head(m) = A.adjoint_apply(w);
        r.tail(mi) = -D.adjoint_apply(w);
        return r;
      };
      blk.A = am;
      blk.majorizer_factory = nullptr;
    } else {
      blk.A = extend_first(blk.A, mi);
      blk.majorizer_factory = nullptr;
    }
    out.theta.push_back(std::move(blk));
  }
  for (const auto& ph : pb.phi) {
    QuadraticBlock blk = ph;
    blk.A = extend_first(blk.A, mi);
    blk.majorizer_factory = nullptr;
    out.phi.push_back(std::move(blk));
  }
  return out;
}

}  // namespace scbadmm
