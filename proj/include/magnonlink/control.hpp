// SPDX-License-Identifier: Apache-2.0
//
// Time-dependent coupling design: invariant-based pulses for the local
// Bell-state stage and the engineered G_L/G_R profiles for the transfer
// stage, unified into a piecewise ControlSchedule.

#ifndef MAGNONLINK_CONTROL_HPP
#define MAGNONLINK_CONTROL_HPP

#include <cmath>
#include <functional>

#include "magnonlink/model.hpp"
#include "magnonlink/tensor.hpp"

namespace magnonlink {

// Parameterization (gamma(t), theta(t), Omega0) of the dynamical invariant
// and its eigenframe. Omega0 is a pure scale, fixed to 1 by default.
struct InvariantSpec {
  std::function<double(double)> gamma_fn;
  std::function<double(double)> theta_fn;
  std::function<double(double)> gamma_dot_fn;
  std::function<double(double)> theta_dot_fn;
  double Omega0 = 1.0;

  // gamma = (pi/2T1) t - pi/2, theta = pi/4: the linear ramp driving
  // |g100> into the local Bell state over [0, T1].
  static InvariantSpec bell_ramp(double T1) {
    InvariantSpec s;
    s.gamma_fn = [T1](double t) { return 0.5 * M_PI * t / T1 - 0.5 * M_PI; };
    s.theta_fn = [](double) { return 0.25 * M_PI; };
    s.gamma_dot_fn = [T1](double) { return 0.5 * M_PI / T1; };
    s.theta_dot_fn = [](double) { return 0.0; };
    return s;
  }
};

// 3x3 invariant matrix on the logical basis {|e000>, |g100>, |g010>}.
inline ComplexMatrix invariant_matrix(const InvariantSpec& spec, double t) {
  const double g = spec.gamma_fn(t), th = spec.theta_fn(t);
  const double cg = std::cos(g), sg = std::sin(g);
  const double ct = std::cos(th), st = std::sin(th);
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 1) = m(1, 0) = cg * st;
  m(1, 2) = m(2, 1) = cg * ct;
  m(0, 2) = Complex(0.0, -sg);
  m(2, 0) = Complex(0.0, sg);
  return spec.Omega0 * m;
}

// Analytic time derivative of invariant_matrix.
inline ComplexMatrix invariant_matrix_dot(const InvariantSpec& spec, double t) {
  const double g = spec.gamma_fn(t), th = spec.theta_fn(t);
  const double gd = spec.gamma_dot_fn(t), td = spec.theta_dot_fn(t);
  const double cg = std::cos(g), sg = std::sin(g);
  const double ct = std::cos(th), st = std::sin(th);
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 1) = m(1, 0) = -gd * sg * st + td * cg * ct;
  m(1, 2) = m(2, 1) = -gd * sg * ct - td * cg * st;
  m(0, 2) = Complex(0.0, -gd * cg);
  m(2, 0) = Complex(0.0, gd * cg);
  return spec.Omega0 * m;
}

// Closed-form eigenstates phi_0, phi_+, phi_- (eigenvalues 0, +Omega0,
// -Omega0), each unit norm.
struct InvariantEigenstates {
  ComplexVector phi0, phi_plus, phi_minus;
};

inline InvariantEigenstates invariant_eigenstates(const InvariantSpec& spec,
                                                  double t) {
  const double g = spec.gamma_fn(t), th = spec.theta_fn(t);
  const double cg = std::cos(g), sg = std::sin(g);
  const double ct = std::cos(th), st = std::sin(th);
  InvariantEigenstates e;
  e.phi0 = ComplexVector(3);
  e.phi0 << Complex(cg * ct), Complex(0.0, -sg), Complex(-cg * st);
  const double r = 1.0 / std::sqrt(2.0);
  e.phi_plus = ComplexVector(3);
  e.phi_plus << r * Complex(sg * ct, st), r * Complex(0.0, cg),
      r * Complex(-sg * st, ct);
  e.phi_minus = ComplexVector(3);
  e.phi_minus << r * Complex(sg * ct, -st), r * Complex(0.0, cg),
      r * Complex(-sg * st, -ct);
  return e;
}

// Analytic d/dt of the eigenstates (needed for the Lewis-Riesenfeld phase).
inline InvariantEigenstates invariant_eigenstates_dot(const InvariantSpec& spec,
                                                      double t) {
  const double g = spec.gamma_fn(t), th = spec.theta_fn(t);
  const double gd = spec.gamma_dot_fn(t), td = spec.theta_dot_fn(t);
  const double cg = std::cos(g), sg = std::sin(g);
  const double ct = std::cos(th), st = std::sin(th);
  InvariantEigenstates e;
  e.phi0 = ComplexVector(3);
  e.phi0 << Complex(-gd * sg * ct - td * cg * st), Complex(0.0, -gd * cg),
      Complex(gd * sg * st - td * cg * ct);
  const double r = 1.0 / std::sqrt(2.0);
  e.phi_plus = ComplexVector(3);
  e.phi_plus << r * Complex(gd * cg * ct - td * sg * st, td * ct),
      r * Complex(0.0, -gd * sg),
      r * Complex(-gd * cg * st - td * sg * ct, -td * st);
  e.phi_minus = ComplexVector(3);
  e.phi_minus << r * Complex(gd * cg * ct - td * sg * st, -td * ct),
      r * Complex(0.0, -gd * sg),
      r * Complex(-gd * cg * st - td * sg * ct, td * st);
  return e;
}

// Auxiliary equations g1 = theta' cot(gamma) sin(theta) + gamma' cos(theta),
// g2 = theta' cot(gamma) cos(theta) - gamma' sin(theta). The cot term is
// evaluated only when theta' != 0; evaluation at sin(gamma) = 0 with a
// nonzero theta' is rejected.
inline std::pair<double, double> sta_couplings(const InvariantSpec& spec,
                                               double t) {
  const double g = spec.gamma_fn(t), th = spec.theta_fn(t);
  const double gd = spec.gamma_dot_fn(t), td = spec.theta_dot_fn(t);
  const double ct = std::cos(th), st = std::sin(th);
  double cot_term = 0.0;
  if (td != 0.0) {
    const double sg = std::sin(g);
    if (std::abs(sg) < 1e-12)
      throw std::domain_error("sta_couplings: cot(gamma) singular at t=" +
                              std::to_string(t));
    cot_term = td * std::cos(g) / sg;
  }
  return {cot_term * st + gd * ct, cot_term * ct - gd * st};
}

// Stage-1 Hamiltonian restricted to the logical basis {|e000>, |g100>,
// |g010>}; the closed single-excitation dynamics lives entirely here.
inline ComplexMatrix h_stage1_logical(double g1, double g2) {
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(0, 1) = h(1, 0) = g1;
  h(1, 2) = h(2, 1) = g2;
  return h;
}

enum class InvariantMode { kZero = 0, kPlus = 1, kMinus = 2 };

// Lewis-Riesenfeld phase alpha_n(t) by composite-trapezoid quadrature of
// <phi_n| i d/dt' - H(t') |phi_n> with step <= T_end/2000.
inline double lr_phase(const InvariantSpec& spec, InvariantMode mode, double t,
                       const std::function<ComplexMatrix(double)>& h_fn,
                       double quad_step) {
  if (quad_step <= 0) throw std::invalid_argument("lr_phase: bad quadrature step");
  if (t <= 0) return 0.0;
  auto pick = [&](const InvariantEigenstates& e) -> const ComplexVector& {
    switch (mode) {
      case InvariantMode::kZero: return e.phi0;
      case InvariantMode::kPlus: return e.phi_plus;
      default: return e.phi_minus;
    }
  };
  auto integrand = [&](double s) {
    const InvariantEigenstates e = invariant_eigenstates(spec, s);
    const InvariantEigenstates ed = invariant_eigenstates_dot(spec, s);
    const ComplexVector& phi = pick(e);
    const ComplexVector& dphi = pick(ed);
    const Complex geom = Complex(0.0, 1.0) * phi.dot(dphi);  // <phi|i dphi>
    const Complex dyn = phi.dot(h_fn(s) * phi);
    return (geom - dyn).real();
  };
  const int n = std::max(1, static_cast<int>(std::ceil(t / quad_step)));
  const double h = t / n;
  double acc = 0.5 * (integrand(0.0) + integrand(t));
  for (int k = 1; k < n; ++k) acc += integrand(k * h);
  return acc * h;
}

// Piecewise controls for the whole protocol. Couplings in rad/us.
struct ControlSchedule {
  double T1 = 0.0, T2 = 0.0;
  double g1_const = 0.0, g2_const = 0.0;  // stage-1 plateau values (Eq. 18 form)
  double Omega_ang = 0.0, g_wg_ang = 0.0;

  double g1(double t) const { return (t >= 0 && t < T1) ? g1_const : 0.0; }
  double g2(double t) const { return (t >= 0 && t < T1) ? g2_const : 0.0; }

  std::pair<double, double> stage2_GLGR(double t) const {
    if (t < T1 || t >= T2) return {0.0, 0.0};
    const double u = 4.0 * Omega_ang * Omega_ang * (t - T1) / g_wg_ang - 10.0;
    const double s = -std::tanh(0.5 * u);  // (1-e^u)/(1+e^u)
    return {Omega_ang * std::sqrt(0.5 * (1.0 - s)),
            Omega_ang * std::sqrt(0.5 * (1.0 + s))};
  }

  double GL(double t) const { return stage2_GLGR(t).first; }
  double GR(double t) const { return stage2_GLGR(t).second; }

  Complex g_eff(double t) const {
    auto [gl, gr] = stage2_GLGR(t);
    return g_eff_from_pulses(gl, gr, g_wg_ang);
  }

  Eigen::Matrix2d stilde(double t) const {
    auto [gl, gr] = stage2_GLGR(t);
    return stilde_coefficients(gl, gr, g_wg_ang);
  }
};

// Engineered pulse pair at time t >= T1.
inline std::pair<double, double> stage2_pulses(const SystemParams& p, double t) {
  ControlSchedule s;
  s.T1 = p.T1;
  s.T2 = p.T2;
  s.Omega_ang = p.Omega_ang();
  s.g_wg_ang = p.g_wg_ang();
  return s.stage2_GLGR(t);
}

// Full two-stage schedule; stage 1 uses the analytically reduced constants
// g1 = -g2 = sqrt(2) pi / (4 T1).
inline ControlSchedule build_schedule(const SystemParams& p) {
  p.validate();
  ControlSchedule s;
  s.T1 = p.T1;
  s.T2 = p.T2;
  s.g1_const = std::sqrt(2.0) * M_PI / (4.0 * p.T1);
  s.g2_const = -s.g1_const;
  s.Omega_ang = p.Omega_ang();
  s.g_wg_ang = p.g_wg_ang();
  return s;
}

}  // namespace magnonlink

#endif  // MAGNONLINK_CONTROL_HPP
