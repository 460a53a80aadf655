#include "scbadmm/diagnostics.hpp"

#include <cmath>

namespace scbadmm {

void ResidualReport::finalize() {
  double m = 0.0;
  bool any = false;
  for (double v : {eta_P, eta_D, eta_f, eta_g, eta_theta, eta_phi, eta_Z, eta_S1, eta_S2, eta_Xi}) {
    if (!std::isnan(v)) {
      m = std::max(m, v);
      any = true;
    }
  }
  eta = any ? m : std::numeric_limits<double>::quiet_NaN();
}

namespace {

void attach_gap(ResidualReport& rep, const BlockProblem& pb, const IterateState& s) {
  auto [op, od] = objective_values(pb, s);
  rep.obj_P = op;
  rep.obj_D = od;
  if (std::isfinite(op) && std::isfinite(od))
    rep.eta_gap = (op - od) / (1.0 + std::abs(op) + std::abs(od));
}

}  // namespace

ResidualReport eta_general(const BlockProblem& pb, const IterateState& s, bool with_gap) {
  ResidualReport rep;
  rep.iter = s.iter;
  rep.eta_P = constraint_residual(pb, s).norm() / (1.0 + pb.c.norm());

  {
    const Vec Fx = pb.f.map.apply(s.x);
    const Vec pu = pb.f.fn.prox(Vec(s.u - Fx), 1.0);
    rep.eta_f = (s.u - pu).norm() / (1.0 + s.u.norm() + Fx.norm());
  }
  {
    const Vec Gx = pb.g.map.apply(s.x);
    const Vec pv = pb.g.fn.prox(Vec(s.v - Gx), 1.0);
    rep.eta_g = (s.v - pv).norm() / (1.0 + s.v.norm() + Gx.norm());
  }
  if (!pb.theta.empty()) {
    double worst = 0.0;
    for (size_t i = 0; i < pb.theta.size(); ++i) {
      const Vec Ax = pb.theta[i].A.apply(s.x);
      const Vec w = s.y[i] - Ax;
      const Vec py = pb.theta[i].P.resolve(1.0, Vec(w + pb.theta[i].b));
      worst = std::max(worst, (s.y[i] - py).norm() / (1.0 + s.y[i].norm() + Ax.norm()));
    }
    rep.eta_theta = worst;
  }
  if (!pb.phi.empty()) {
    double worst = 0.0;
    for (size_t j = 0; j < pb.phi.size(); ++j) {
      const Vec Ax = pb.phi[j].A.apply(s.x);
      const Vec w = s.z[j] - Ax;
      const Vec pz = pb.phi[j].P.resolve(1.0, Vec(w + pb.phi[j].b));
      worst = std::max(worst, (s.z[j] - pz).norm() / (1.0 + s.z[j].norm() + Ax.norm()));
    }
    rep.eta_phi = worst;
  }
  rep.finalize();
  if (with_gap) attach_gap(rep, pb, s);
  return rep;
}

ResidualReport eta_qsdp(const QsdpKkt& kkt, const Vec& X, const Vec& Z, const Vec& Xi,
                        const Vec& S, const Vec& yE) {
  ResidualReport rep;
  rep.eta_P = (kkt.A_E.apply(X) - kkt.b_E).norm() / (1.0 + kkt.b_E.norm());
  {
    Vec dual = Z + S + kkt.A_E.adjoint_apply(yE) - kkt.C;
    if (kkt.Bstar && Xi.size()) dual -= -kkt.Bstar(Xi);  // Upsilon = -B* Xi enters as -Upsilon
    rep.eta_D = dual.norm() / (1.0 + kkt.C.norm());
  }
  rep.eta_Z = (X - proj_box(Vec(X - Z), kkt.K)).norm() / (1.0 + X.norm() + Z.norm());
  rep.eta_S1 = std::abs(S.dot(X)) / (1.0 + S.norm() + X.norm());
  rep.eta_S2 = (X - svec(proj_psd(smat(X)))).norm() / (1.0 + X.norm());
  rep.finalize();
  return rep;
}

ResidualReport eta_sncm(const SncmKkt& kkt, const Vec& X, const Vec& Z, const Vec& Xi,
                        const Vec& Gamma, const Vec& S, const Vec& yE) {
  ResidualReport rep;
  rep.eta_P = (kkt.A_E.apply(X) - kkt.b_E).norm() / (1.0 + kkt.b_E.norm());
  {
    const Vec dual = Z + kkt.H.cwiseProduct(Xi) + S + kkt.A_E.adjoint_apply(yE) - kkt.C;
    rep.eta_D = dual.norm() / (1.0 + Z.norm() + S.norm());
  }
  rep.eta_Z = (X - proj_box(Vec(X - Z), kkt.K)).norm() / (1.0 + X.norm() + Z.norm());
  rep.eta_S1 = std::abs(S.dot(X)) / (1.0 + S.norm() + X.norm());
  rep.eta_S2 = (X - svec(proj_psd(smat(X)))).norm() / (1.0 + X.norm());
  {
    const Vec hxg = kkt.H.cwiseProduct(Vec(X - kkt.G));
    const Vec pr = svec(proj_nuclear_ball(smat(Vec(Gamma - hxg)), 1.0));
    rep.eta_Xi = (Gamma - pr).norm() / (1.0 + Gamma.norm() + hxg.norm());
  }
  rep.finalize();
  return rep;
}

}  // namespace scbadmm
