// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "magnonlink/control.hpp"

using namespace magnonlink;
using Catch::Matchers::WithinAbs;

TEST_CASE("invariant matrix structure") {
  const double T1 = 0.1;
  const InvariantSpec spec = InvariantSpec::bell_ramp(T1);

  // at t = 0: gamma = -pi/2, theta = pi/4 -> only the corner entries survive
  const ComplexMatrix i0 = invariant_matrix(spec, 0.0);
  REQUIRE(std::abs(i0(0, 2) - Complex(0.0, 1.0)) < 1e-14);
  REQUIRE(std::abs(i0(2, 0) - Complex(0.0, -1.0)) < 1e-14);
  REQUIRE(std::abs(i0(0, 1)) < 1e-14);
  REQUIRE(std::abs(i0(1, 2)) < 1e-14);

  for (double t : {0.0, 0.3 * T1, 0.77 * T1, T1}) {
    const ComplexMatrix m = invariant_matrix(spec, t);
    REQUIRE((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    REQUIRE_THAT(es.eigenvalues()(0), WithinAbs(-spec.Omega0, 1e-12));
    REQUIRE_THAT(es.eigenvalues()(1), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(es.eigenvalues()(2), WithinAbs(spec.Omega0, 1e-12));
  }
}

TEST_CASE("invariant matrix derivative matches finite differences") {
  const InvariantSpec spec = InvariantSpec::bell_ramp(0.08);
  const double h = 1e-6;
  for (double t : {0.01, 0.04, 0.07}) {
    const ComplexMatrix fd =
        (invariant_matrix(spec, t + h) - invariant_matrix(spec, t - h)) /
        (2.0 * h);
    REQUIRE((fd - invariant_matrix_dot(spec, t)).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("closed-form eigenstates") {
  // gamma = 0, theta = 0 -> phi0 = (1, 0, 0)
  InvariantSpec flat;
  flat.gamma_fn = [](double) { return 0.0; };
  flat.theta_fn = [](double) { return 0.0; };
  flat.gamma_dot_fn = [](double) { return 0.0; };
  flat.theta_dot_fn = [](double) { return 0.0; };
  const InvariantEigenstates e0 = invariant_eigenstates(flat, 0.0);
  REQUIRE(std::abs(e0.phi0(0) - Complex(1.0)) < 1e-15);
  REQUIRE(std::abs(e0.phi0(1)) < 1e-15);
  REQUIRE(std::abs(e0.phi0(2)) < 1e-15);

  // random (gamma, theta): exact eigenvectors and orthonormal Gram matrix
  for (auto [g, th] : std::vector<std::pair<double, double>>{
           {0.3, 0.9}, {-1.1, 0.2}, {2.2, -0.6}}) {
    InvariantSpec s;
    s.gamma_fn = [g](double) { return g; };
    s.theta_fn = [th](double) { return th; };
    s.gamma_dot_fn = [](double) { return 0.0; };
    s.theta_dot_fn = [](double) { return 0.0; };
    const ComplexMatrix im = invariant_matrix(s, 0.0);
    const InvariantEigenstates e = invariant_eigenstates(s, 0.0);
    REQUIRE((im * e.phi0).norm() < 1e-12);
    REQUIRE((im * e.phi_plus - s.Omega0 * e.phi_plus).norm() < 1e-12);
    REQUIRE((im * e.phi_minus + s.Omega0 * e.phi_minus).norm() < 1e-12);
    ComplexMatrix basis(3, 3);
    basis.col(0) = e.phi0;
    basis.col(1) = e.phi_plus;
    basis.col(2) = e.phi_minus;
    REQUIRE((basis.adjoint() * basis - ComplexMatrix::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
  }
}

TEST_CASE("eigenstate derivatives match finite differences") {
  const InvariantSpec spec = InvariantSpec::bell_ramp(0.09);
  const double h = 1e-6;
  for (double t : {0.02, 0.05, 0.08}) {
    const InvariantEigenstates p = invariant_eigenstates(spec, t + h);
    const InvariantEigenstates m = invariant_eigenstates(spec, t - h);
    const InvariantEigenstates d = invariant_eigenstates_dot(spec, t);
    REQUIRE(((p.phi0 - m.phi0) / (2 * h) - d.phi0).norm() < 1e-6);
    REQUIRE(((p.phi_plus - m.phi_plus) / (2 * h) - d.phi_plus).norm() < 1e-6);
    REQUIRE(((p.phi_minus - m.phi_minus) / (2 * h) - d.phi_minus).norm() <
            1e-6);
  }
}

TEST_CASE("auxiliary coupling equations") {
  const double T1 = 0.070710678118654752;
  const InvariantSpec spec = InvariantSpec::bell_ramp(T1);

  // the linear-ramp protocol gives constant g1 = -g2 = sqrt(2) pi / (4 T1)
  const double expected = std::sqrt(2.0) * M_PI / (4.0 * T1);
  for (double t : {0.1 * T1, 0.5 * T1, 0.9 * T1}) {
    const auto [g1, g2] = sta_couplings(spec, t);
    REQUIRE_THAT(g1, WithinAbs(expected, 1e-12));
    REQUIRE_THAT(g2, WithinAbs(-expected, 1e-12));
  }

  // T1 = 1 (angular units): g1 = sqrt(2) pi / 4
  const auto [g1u, g2u] = sta_couplings(InvariantSpec::bell_ramp(1.0), 0.5);
  REQUIRE_THAT(g1u, WithinAbs(1.1107207345, 1e-9));

  // frozen parameterization gives zero couplings
  InvariantSpec frozen;
  frozen.gamma_fn = [](double) { return 0.4; };
  frozen.theta_fn = [](double) { return 0.2; };
  frozen.gamma_dot_fn = [](double) { return 0.0; };
  frozen.theta_dot_fn = [](double) { return 0.0; };
  const auto [gz1, gz2] = sta_couplings(frozen, 0.0);
  REQUIRE(gz1 == 0.0);
  REQUIRE(gz2 == 0.0);

  // cot(gamma) singularity with nonzero theta-dot is rejected, naming t
  InvariantSpec sing;
  sing.gamma_fn = [](double) { return 0.0; };  // sin(gamma) = 0
  sing.theta_fn = [](double) { return 0.3; };
  sing.gamma_dot_fn = [](double) { return 1.0; };
  sing.theta_dot_fn = [](double) { return 1.0; };
  REQUIRE_THROWS_AS(sta_couplings(sing, 0.25), std::domain_error);
}

TEST_CASE("Lewis-Riesenfeld phase") {
  const double T1 = 0.070710678118654752;
  const InvariantSpec spec = InvariantSpec::bell_ramp(T1);
  auto h_fn = [&](double t) {
    const auto [g1, g2] = sta_couplings(spec, std::clamp(t, 1e-9, T1 - 1e-9));
    return h_stage1_logical(g1, g2);
  };
  const double step = T1 / 2000.0;

  REQUIRE(lr_phase(spec, InvariantMode::kZero, 0.0, h_fn, step) == 0.0);
  REQUIRE_THROWS_AS(lr_phase(spec, InvariantMode::kZero, T1, h_fn, 0.0),
                    std::invalid_argument);

  // adding lambda * identity to H shifts alpha by -lambda * t
  const double lambda = 2.5, t = 0.6 * T1;
  auto h_shift = [&](double s) {
    return (h_fn(s) + lambda * ComplexMatrix::Identity(3, 3)).eval();
  };
  const double a0 = lr_phase(spec, InvariantMode::kPlus, t, h_fn, step);
  const double a1 = lr_phase(spec, InvariantMode::kPlus, t, h_shift, step);
  REQUIRE_THAT(a1 - a0, WithinAbs(-lambda * t, 1e-9));
}

TEST_CASE("stage-2 pulse profiles") {
  SystemParams p;
  const double Om = p.Omega_ang(), g = p.g_wg_ang();

  // sigmoid midpoint: G_L = G_R = Omega / sqrt(2)
  const double t_mid = p.T1 + 10.0 * g / (4.0 * Om * Om);
  const auto [gl_m, gr_m] = stage2_pulses(p, t_mid);
  REQUIRE_THAT(gl_m, WithinAbs(Om / std::sqrt(2.0), 1e-9));
  REQUIRE_THAT(gr_m, WithinAbs(Om / std::sqrt(2.0), 1e-9));

  // onset: s = tanh(5), G_L tiny, G_R near Omega
  const auto [gl_0, gr_0] = stage2_pulses(p, p.T1);
  REQUIRE_THAT(gl_0 / Om, WithinAbs(6.7e-3, 2e-4));
  REQUIRE_THAT(gr_0 / Om, WithinAbs(1.0, 1e-4));

  // constraint G_L^2 + G_R^2 = Omega^2 across the stage
  for (int k = 0; k <= 20; ++k) {
    const double t = p.T1 + (p.T2 - p.T1) * (k + 0.5) / 21.0;
    const auto [gl, gr] = stage2_pulses(p, t);
    REQUIRE_THAT(gl * gl + gr * gr, WithinAbs(Om * Om, 1e-12 * Om * Om));
  }
}

TEST_CASE("full schedule") {
  SystemParams p;
  const ControlSchedule s = build_schedule(p);
  const double expected = std::sqrt(2.0) * M_PI / (4.0 * p.T1);
  REQUIRE_THAT(s.g1_const, WithinAbs(expected, 1e-12));
  REQUIRE_THAT(s.g2_const, WithinAbs(-expected, 1e-12));

  const double eps = 1e-9;
  // stage gating: local couplings vanish after T1, pulses vanish before
  REQUIRE(s.g1(p.T1 + eps) == 0.0);
  REQUIRE(s.g2(p.T1 + eps) == 0.0);
  REQUIRE(s.GL(p.T1 - eps) == 0.0);
  REQUIRE(s.GR(p.T1 - eps) == 0.0);
  REQUIRE(s.g1(0.5 * p.T1) != 0.0);
  REQUIRE(s.GL(p.T2 + eps) == 0.0);

  // effective coupling magnitude at the sigmoid midpoint: 0.0225 g
  const double t_mid = p.T1 + 10.0 * s.g_wg_ang / (4.0 * s.Omega_ang * s.Omega_ang);
  REQUIRE_THAT(std::abs(s.g_eff(t_mid)), WithinAbs(0.0225 * s.g_wg_ang, 1e-6));

  // structured coefficients track the pulses
  const Eigen::Matrix2d st = s.stilde(t_mid);
  REQUIRE_THAT(st(0, 0), WithinAbs(st(1, 1), 1e-9));
  REQUIRE(st(0, 1) < 0.0);
}

TEST_CASE("invariant condition residual on a fine grid") {
  const double T1 = 0.070710678118654752;
  const InvariantSpec spec = InvariantSpec::bell_ramp(T1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = T1 * (k + 0.5) / 1000.0;
    const auto [g1, g2] = sta_couplings(spec, t);
    const ComplexMatrix h = h_stage1_logical(g1, g2);
    const ComplexMatrix im = invariant_matrix(spec, t);
    const ComplexMatrix resid =
        Complex(0, 1) * invariant_matrix_dot(spec, t) - (h * im - im * h);
    worst = std::max(worst, resid.cwiseAbs().maxCoeff());
  }
  REQUIRE(worst <= 1e-8 * spec.Omega0);
}
