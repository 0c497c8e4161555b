// SPDX-License-Identifier: Apache-2.0
//
// Physical model of the hybrid chain: interaction-picture Hamiltonians for
// both protocol stages, thermal occupations, and the Lindblad dissipator set
// (diagonal thermal channels plus the structured waveguide cross terms).

#ifndef MAGNONLINK_MODEL_HPP
#define MAGNONLINK_MODEL_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "magnonlink/tensor.hpp"

namespace magnonlink {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// 2018 CODATA (exact by SI definition)
constexpr double kPlanck = 6.62607015e-34;     // J s
constexpr double kBoltzmann = 1.380649e-23;    // J/K

// Subsystem indices in the fixed (q, c, m_L, m_R) ordering.
enum Subsystem : int { kQubit = 0, kCavity = 1, kMagnonL = 2, kMagnonR = 3 };

// Single-mode building blocks.
inline ComplexMatrix lowering(int dim) {
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline ComplexMatrix sigma_minus() { return lowering(2); }

inline ComplexMatrix sigma_z() {
  ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  z(0, 0) = -1.0;  // |g>
  z(1, 1) = 1.0;   // |e>
  return z;
}

// Configuration-level parameters. Frequencies are cyclic GHz (value of
// omega/2pi); dissipation rates are MHz and are read as cyclic (divided-by-2pi)
// values when rates_are_angular is false, or directly as 1/us when true.
// Couplings g_wg and Omega are cyclic MHz. Times in us.
struct SystemParams {
  double omega_q = 5.0;
  double omega_c = 10.0;
  double omega_mL = 5.0;
  double omega_mR = 5.0;

  double gamma_q = 0.01;
  double gamma_phi = 0.1;
  double kappa_c = 0.5;
  double kappa_mL = 0.5;
  double kappa_mR = 0.5;
  bool rates_are_angular = true;

  double T_th = 0.05;    // K
  double g_wg = 120.0;   // MHz
  double Omega = 18.0;   // MHz, = 0.15 g_wg
  double T1 = 0.070710678118654752;  // sqrt(2)/20 us -> g1/2pi = 2.5 MHz
  double T2 = T1 + 200.0 / (kTwoPi * g_wg);  // past sigmoid saturation
  int truncation = 2;

  // conversion of a configured rate to angular units (1/us)
  double rate_to_angular(double r) const {
    return rates_are_angular ? r : kTwoPi * r;
  }

  double gamma_q_ang() const { return rate_to_angular(gamma_q); }
  double gamma_phi_ang() const { return rate_to_angular(gamma_phi); }
  double kappa_c_ang() const { return rate_to_angular(kappa_c); }
  double kappa_mL_ang() const { return rate_to_angular(kappa_mL); }
  double kappa_mR_ang() const { return rate_to_angular(kappa_mR); }
  double g_wg_ang() const { return kTwoPi * g_wg; }
  double Omega_ang() const { return kTwoPi * Omega; }

  HilbertLayout layout() const { return HilbertLayout::standard(truncation); }

  void validate() const {
    if (gamma_q < 0 || gamma_phi < 0 || kappa_c < 0 || kappa_mL < 0 || kappa_mR < 0)
      throw std::invalid_argument("SystemParams: rates must be >= 0");
    if (T_th <= 0) throw std::invalid_argument("SystemParams: T_th must be > 0");
    if (g_wg <= 0) throw std::invalid_argument("SystemParams: g_wg must be > 0");
    if (Omega <= 0) throw std::invalid_argument("SystemParams: Omega must be > 0");
    if (!(0 < T1 && T1 < T2))
      throw std::invalid_argument("SystemParams: need 0 < T1 < T2");
    if (truncation < 2 || truncation > 4)
      throw std::invalid_argument("SystemParams: truncation must be in [2,4]");
  }
};

// Mean thermal quanta of a mode at cyclic frequency f (GHz), temperature T (K).
inline double thermal_occupation(double freq_GHz, double T_K) {
  if (freq_GHz <= 0 || T_K <= 0)
    throw std::invalid_argument("thermal_occupation: inputs must be > 0");
  const double x = kPlanck * freq_GHz * 1e9 / (kBoltzmann * T_K);
  return 1.0 / std::expm1(x);
}

// Stage-1 interaction Hamiltonian g1 (s- c^dag + s+ c) + g2 (c mL^dag + c^dag mL)
// on the full composite space. Couplings in angular units (rad/us).
inline ComplexMatrix h_stage1(double g1, double g2, const HilbertLayout& layout) {
  const ComplexMatrix sm = embed(sigma_minus(), kQubit, layout);
  const ComplexMatrix c = embed(lowering(layout.dims[kCavity]), kCavity, layout);
  const ComplexMatrix ml = embed(lowering(layout.dims[kMagnonL]), kMagnonL, layout);
  ComplexMatrix h = g1 * (sm * c.adjoint() + sm.adjoint() * c) +
                    g2 * (c * ml.adjoint() + c.adjoint() * ml);
  return h;
}

// Stage-2 effective magnon-magnon Hamiltonian g_eff mR^dag mL + h.c.
inline ComplexMatrix h_stage2(Complex g_eff, const HilbertLayout& layout) {
  const ComplexMatrix ml = embed(lowering(layout.dims[kMagnonL]), kMagnonL, layout);
  const ComplexMatrix mr = embed(lowering(layout.dims[kMagnonR]), kMagnonR, layout);
  return g_eff * (mr.adjoint() * ml) + std::conj(g_eff) * (ml.adjoint() * mr);
}

// g_eff = 2i G_L G_R / g (all angular).
inline Complex g_eff_from_pulses(double G_L, double G_R, double g_wg) {
  if (g_wg <= 0) throw std::invalid_argument("g_eff_from_pulses: g_wg must be > 0");
  return Complex(0.0, 2.0 * G_L * G_R / g_wg);
}

// Coefficient matrix [[S_LL, S_LR], [S_RL, S_RR]] of the structured magnon
// dissipator; real symmetric positive semidefinite with eigenvalues
// {0, 2 (G_L^2 + G_R^2)/g}.
inline Eigen::Matrix2d stilde_coefficients(double G_L, double G_R, double g_wg) {
  if (g_wg <= 0)
    throw std::invalid_argument("stilde_coefficients: g_wg must be > 0");
  Eigen::Matrix2d s;
  s(0, 0) = 2.0 * G_L * G_L / g_wg;
  s(1, 1) = 2.0 * G_R * G_R / g_wg;
  s(0, 1) = s(1, 0) = -2.0 * G_L * G_R / g_wg;
  return s;
}

// One diagonal Lindblad channel: rate * L[op], rate angular (1/us).
struct DissipatorTerm {
  ComplexMatrix op;
  double rate = 0.0;
  std::string label;
};

// Operators entering the four structured magnon terms. The time-dependent
// coefficient matrix comes from stilde_coefficients at each instant.
struct CrossDissipatorSet {
  ComplexMatrix m_ops[2];  // m_L, m_R embedded on the full space
};

struct DissipatorSet {
  std::vector<DissipatorTerm> diagonal;
  CrossDissipatorSet cross;
};

// All Eq.-(28)-style channels for the configured rates. Channels with zero
// rate are dropped.
inline DissipatorSet build_dissipators(const SystemParams& p,
                                       const HilbertLayout& layout) {
  DissipatorSet out;
  const double nc = thermal_occupation(p.omega_c, p.T_th);
  const double nl = thermal_occupation(p.omega_mL, p.T_th);
  const double nr = thermal_occupation(p.omega_mR, p.T_th);

  auto add = [&](ComplexMatrix op, double rate, const char* label) {
    if (rate > 0.0) out.diagonal.push_back({std::move(op), rate, label});
  };

  const ComplexMatrix sm = embed(sigma_minus(), kQubit, layout);
  const ComplexMatrix sz = embed(sigma_z(), kQubit, layout);
  const ComplexMatrix c = embed(lowering(layout.dims[kCavity]), kCavity, layout);
  const ComplexMatrix ml = embed(lowering(layout.dims[kMagnonL]), kMagnonL, layout);
  const ComplexMatrix mr = embed(lowering(layout.dims[kMagnonR]), kMagnonR, layout);

  add(sm, p.gamma_q_ang(), "gamma_q L[sigma-]");
  add(sz, 0.5 * p.gamma_phi_ang(), "gamma_phi/2 L[sigma_z]");
  add(c, p.kappa_c_ang() * (nc + 1.0), "kappa_c (n+1) L[c]");
  add(c.adjoint(), p.kappa_c_ang() * nc, "kappa_c n L[c+]");
  add(ml, p.kappa_mL_ang() * (nl + 1.0), "kappa_mL (n+1) L[mL]");
  add(ml.adjoint(), p.kappa_mL_ang() * nl, "kappa_mL n L[mL+]");
  add(mr, p.kappa_mR_ang() * (nr + 1.0), "kappa_mR (n+1) L[mR]");
  add(mr.adjoint(), p.kappa_mR_ang() * nr, "kappa_mR n L[mR+]");

  out.cross.m_ops[0] = ml;
  out.cross.m_ops[1] = mr;
  return out;
}

}  // namespace magnonlink

#endif  // MAGNONLINK_MODEL_HPP
