#pragma once

#include "scbadmm/model.hpp"

namespace scbadmm {

// Scale-normalized KKT residuals.  Components that do not apply to a given
// problem family are left as NaN; eta is the max over populated components.
struct ResidualReport {
  double eta_P = std::numeric_limits<double>::quiet_NaN();
  double eta_D = std::numeric_limits<double>::quiet_NaN();
  double eta_f = std::numeric_limits<double>::quiet_NaN();
  double eta_g = std::numeric_limits<double>::quiet_NaN();
  double eta_theta = std::numeric_limits<double>::quiet_NaN();
  double eta_phi = std::numeric_limits<double>::quiet_NaN();
  double eta_Z = std::numeric_limits<double>::quiet_NaN();
  double eta_S1 = std::numeric_limits<double>::quiet_NaN();
  double eta_S2 = std::numeric_limits<double>::quiet_NaN();
  double eta_Xi = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double eta_gap = std::numeric_limits<double>::quiet_NaN();  // NaN when an objective is infinite
  double obj_P = std::numeric_limits<double>::quiet_NaN();
  double obj_D = std::numeric_limits<double>::quiet_NaN();
  long iter = 0;
  double elapsed_s = 0.0;  // stamped by the solver loop when traced

  void finalize();  // sets eta = max of populated components
};

using ResidualFn = std::function<ResidualReport(const BlockProblem&, const IterateState&, bool with_gap)>;

// Generic stopping residual for the block model:
//   eta_P     = ||Gamma|| / (1 + ||c||)
//   eta_f     = ||u - Prox_f(u - F x)|| / (1 + ||u|| + ||F x||)
//   eta_g     analogous
//   eta_theta = max_i ||y_i - Prox_{theta_i}(y_i - A_i x)|| / (1 + ||y_i|| + ||A_i x||)
//   eta_phi   analogous
// plus eta_gap = (obj_P - obj_D)/(1 + |obj_P| + |obj_D|) when requested.
ResidualReport eta_general(const BlockProblem& pb, const IterateState& s, bool with_gap = true);

// KKT data for the dual block form of min (1/2)<X, QX> + <C, X> over
// S^n_+ intersect K with A_E X = b_E.  Everything in svec coordinates.
struct QsdpKkt {
  int n = 0;
  LinearMap A_E;                              // svec -> R^{m_E}
  Vec b_E;
  Vec C;
  std::function<Vec(const Vec&)> Bstar;       // Xi-space -> svec, null when Q = 0
  int xi_dim = 0;
  BoxParams K;
};

ResidualReport eta_qsdp(const QsdpKkt& kkt, const Vec& X, const Vec& Z, const Vec& Xi,
                        const Vec& S, const Vec& yE);

// Spectral-norm nearest-correlation KKT residuals; adds the nuclear-ball
// complementarity term for Xi and uses (1 + ||Z|| + ||S||) to normalize the
// dual residual.
struct SncmKkt {
  int n = 0;
  LinearMap A_E;
  Vec b_E;
  Vec C;        // svec, zero for the stock model
  Vec H;        // svec_pattern of the weight matrix (diagonal Hadamard action)
  Vec G;        // svec of the target matrix
  BoxParams K;
};

// Xi is the free slack entering the dual-feasibility row; Gamma is the
// nuclear-ball multiplier entering the complementarity term (they coincide at
// optimality through the splitting row).
ResidualReport eta_sncm(const SncmKkt& kkt, const Vec& X, const Vec& Z, const Vec& Xi,
                        const Vec& Gamma, const Vec& S, const Vec& yE);

}  // namespace scbadmm
