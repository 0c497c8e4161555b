// SPDX-License-Identifier: Apache-2.0
//
// Time evolution: fixed-step RK4 integrators for the closed Schrodinger
// equation (oracle use) and for the dissipative master equation with
// time-dependent Hamiltonian and structured magnon dissipator.

#ifndef MAGNONLINK_DYNAMICS_HPP
#define MAGNONLINK_DYNAMICS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "magnonlink/control.hpp"
#include "magnonlink/metrics.hpp"
#include "magnonlink/model.hpp"

namespace magnonlink {

using SparseOp = Eigen::SparseMatrix<Complex>;

struct IntegratorConfig {
  double dt = 0.0;          // <= 0: use default_dt(params)
  int record_stride = 20;
  double trace_abort_tol = 1e-6;
  double renorm_threshold = 1e-9;
  int max_renorms = 100;

  static double default_dt(const SystemParams& p) {
    return std::min(p.T1 / 4000.0, (p.T2 - p.T1) / 40000.0);
  }

  double resolved_dt(const SystemParams& p) const {
    return dt > 0.0 ? dt : default_dt(p);
  }
};

struct TrajectorySample {
  double t = 0.0;
  double pops[4] = {0, 0, 0, 0};  // P_e000, P_g100, P_g010, P_g001
  double N1 = 0.0, N2 = 0.0;
  double trace_err = 0.0, herm_err = 0.0, min_eig = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  long renorm_count = 0;
  double max_trace_err = 0.0, max_herm_err = 0.0, min_eig = 0.0;
  double max_N1 = 0.0, max_N2 = 0.0, t_max_N2 = 0.0;

  void absorb(const TrajectorySample& s) {
    max_trace_err = std::max(max_trace_err, s.trace_err);
    max_herm_err = std::max(max_herm_err, s.herm_err);
    min_eig = samples.empty() ? s.min_eig : std::min(min_eig, s.min_eig);
    max_N1 = std::max(max_N1, s.N1);
    if (s.N2 > max_N2) {
      max_N2 = s.N2;
      t_max_N2 = s.t;
    }
    samples.push_back(s);
  }
};

// Straightforward (dense) master-equation right-hand side; the compiled
// stepper below is checked against this in the tests.
inline ComplexMatrix lindblad_rhs(const DensityMatrix& rho, double t,
                                  const ControlSchedule& schedule,
                                  const DissipatorSet& diss) {
  const HilbertLayout& lay = rho.layout;
  const ComplexMatrix& r = rho.matrix;
  ComplexMatrix h;
  if (t < schedule.T1)
    h = h_stage1(schedule.g1(t), schedule.g2(t), lay);
  else
    h = h_stage2(schedule.g_eff(t), lay);
  ComplexMatrix d = Complex(0, -1) * (h * r - r * h);
  for (const auto& term : diss.diagonal) {
    const ComplexMatrix& op = term.op;
    const ComplexMatrix opd = op.adjoint();
    const ComplexMatrix nn = opd * op;
    d += term.rate * (op * r * opd - 0.5 * (nn * r + r * nn));
  }
  if (t >= schedule.T1) {
    const Eigen::Matrix2d s = schedule.stilde(t);
    const ComplexMatrix* m = diss.cross.m_ops;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        if (s(j, k) == 0.0) continue;
        const ComplexMatrix njk = m[j].adjoint() * m[k];
        d += s(j, k) * (2.0 * m[k] * r * m[j].adjoint() - njk * r - r * njk);
      }
  }
  return d;
}

namespace detail {

inline SparseOp sparsify(const ComplexMatrix& m) {
  SparseOp s = m.sparseView(1.0, 1e-300);
  s.makeCompressed();
  return s;
}

// One protocol stage compiled into sparse operators plus a diagonal drift.
// All diagonal-channel op^dag op products are diagonal here (ladder and
// sigma_z channels), which keeps the per-step cost near the sparsity bound.
class StageGenerator {
 public:
  StageGenerator(bool stage2, const ControlSchedule& schedule,
                 const DissipatorSet& diss, const HilbertLayout& layout)
      : stage2_(stage2), sched_(schedule) {
    const int d = layout.total_dim();
    mdiag_ = RealVector::Zero(d);
    for (const auto& term : diss.diagonal) {
      jumps_.emplace_back(sparsify(std::sqrt(term.rate) * term.op),
                          sparsify(std::sqrt(term.rate) * term.op.adjoint()));
      const ComplexMatrix nn = term.op.adjoint() * term.op;
      mdiag_ += 0.5 * term.rate * nn.diagonal().real();
      off_drift_ = off_drift_ || nn.cwiseAbs().sum() - nn.diagonal().cwiseAbs().sum() > 1e-14;
    }
    if (off_drift_) {
      // fall back to a dense drift if some op^dag op has off-diagonal parts
      ComplexMatrix m = ComplexMatrix::Zero(d, d);
      for (const auto& term : diss.diagonal) {
        // labels unused; recompute directly
      }
      for (const auto& term : diss.diagonal)
        m += 0.5 * term.rate * (term.op.adjoint() * term.op);
      dense_drift_ = std::move(m);
    }
    if (!stage2_) {
      h_const_ = sparsify(
          h_stage1(schedule.g1(0.0), schedule.g2(0.0), layout));
    } else {
      const ComplexMatrix ml = diss.cross.m_ops[0];
      const ComplexMatrix mr = diss.cross.m_ops[1];
      k_ = sparsify(mr.adjoint() * ml);
      kd_ = sparsify(ml.adjoint() * mr);
      for (int j = 0; j < 2; ++j) {
        m_[j] = sparsify(diss.cross.m_ops[j]);
        md_[j] = sparsify(diss.cross.m_ops[j].adjoint());
        for (int k = 0; k < 2; ++k)
          n_[j][k] = sparsify(diss.cross.m_ops[j].adjoint() *
                              diss.cross.m_ops[k]);
      }
    }
  }

  void rhs(const ComplexMatrix& r, double t, ComplexMatrix& out,
           ComplexMatrix& tmp) const {
    const Complex mi(0.0, -1.0);
    if (!stage2_) {
      out.noalias() = mi * (h_const_ * r);
      out.noalias() -= mi * (r * h_const_);
    } else {
      const Complex ge = sched_.g_eff(t);
      out.noalias() = (mi * ge) * (k_ * r);
      out.noalias() += (mi * std::conj(ge)) * (kd_ * r);
      out.noalias() -= (mi * ge) * (r * k_);
      out.noalias() -= (mi * std::conj(ge)) * (r * kd_);
      const Eigen::Matrix2d s = sched_.stilde(t);
      for (int k = 0; k < 2; ++k) {
        tmp.noalias() = m_[k] * r;
        for (int j = 0; j < 2; ++j) {
          if (s(j, k) == 0.0) continue;
          out.noalias() += (2.0 * s(j, k)) * (tmp * md_[j]);
        }
      }
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          if (s(j, k) == 0.0) continue;
          out.noalias() -= s(j, k) * (n_[j][k] * r);
          out.noalias() -= s(j, k) * (r * n_[j][k]);
        }
    }
    for (const auto& [a, ad] : jumps_) {
      tmp.noalias() = a * r;
      out.noalias() += tmp * ad;
    }
    if (off_drift_) {
      out.noalias() -= dense_drift_ * r;
      out.noalias() -= r * dense_drift_;
    } else {
      out -= mdiag_.asDiagonal() * r;
      out -= r * mdiag_.asDiagonal();
    }
  }

 private:
  bool stage2_ = false;
  bool off_drift_ = false;
  ControlSchedule sched_;
  SparseOp h_const_, k_, kd_, m_[2], md_[2], n_[2][2];
  std::vector<std::pair<SparseOp, SparseOp>> jumps_;
  RealVector mdiag_;
  ComplexMatrix dense_drift_;
};

}  // namespace detail

struct EvolveDiagnostics {
  long renorm_count = 0;
};

// Fixed-step RK4 on the master equation over [t_a, t_b]. The step is
// adjusted to land exactly on t_b. Records every record_stride steps.
inline DensityMatrix evolve_lindblad(const DensityMatrix& rho0,
                                     std::pair<double, double> t_span,
                                     const ControlSchedule& schedule,
                                     const DissipatorSet& diss,
                                     const IntegratorConfig& config, double dt,
                                     TrajectoryRecord* record,
                                     bool record_initial = true) {
  const auto [ta, tb] = t_span;
  if (!(tb > ta)) throw std::invalid_argument("evolve_lindblad: empty span");
  if (!(dt > 0)) throw std::invalid_argument("evolve_lindblad: dt must be > 0");
  const bool stage2 = ta >= schedule.T1;
  const detail::StageGenerator gen(stage2, schedule, diss, rho0.layout);

  const long n = std::max<long>(1, std::lround((tb - ta) / dt));
  const double h = (tb - ta) / n;

  ComplexMatrix r = rho0.matrix;
  const long d = r.rows();
  ComplexMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), work(d, d), tmp(d, d);
  long renorms = 0;

  auto sample = [&](double t) {
    if (!record) return;
    TrajectorySample s;
    s.t = t;
    DensityMatrix dm(rho0.layout, r);
    const auto pops = logical_populations(dm);
    s.pops[0] = pops.at("P_e000");
    s.pops[1] = pops.at("P_g100");
    s.pops[2] = pops.at("P_g010");
    s.pops[3] = pops.at("P_g001");
    s.N1 = negativity(dm, {kQubit, kMagnonL});
    s.N2 = negativity(dm, {kQubit, kMagnonR});
    s.trace_err = std::abs(r.trace().real() - 1.0) + std::abs(r.trace().imag());
    s.herm_err = (r - r.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
        0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
    s.min_eig = es.eigenvalues().minCoeff();
    record->absorb(s);
  };

  if (record_initial) sample(ta);
  for (long i = 0; i < n; ++i) {
    const double t = ta + i * h;
    gen.rhs(r, t, k1, tmp);
    work.noalias() = r + (0.5 * h) * k1;
    gen.rhs(work, t + 0.5 * h, k2, tmp);
    work.noalias() = r + (0.5 * h) * k2;
    gen.rhs(work, t + 0.5 * h, k3, tmp);
    work.noalias() = r + h * k3;
    gen.rhs(work, t + h, k4, tmp);
    r.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const Complex tr = r.trace();
    if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()))
      throw std::runtime_error("evolve_lindblad: NaN detected at t=" +
                               std::to_string(t + h));
    const double drift = std::abs(tr - Complex(1.0, 0.0));
    if (drift > config.trace_abort_tol)
      throw std::runtime_error("evolve_lindblad: trace error " +
                               std::to_string(drift) + " at t=" +
                               std::to_string(t + h));
    if (drift > config.renorm_threshold) {
      r = 0.5 * (r + r.adjoint().eval());
      r /= r.trace().real();
      if (++renorms > config.max_renorms)
        throw std::runtime_error(
            "evolve_lindblad: renormalization budget exhausted");
    }
    if (record && ((i + 1) % config.record_stride == 0 || i + 1 == n))
      sample(ta + (i + 1) * h);
  }
  if (record) record->renorm_count += renorms;
  return DensityMatrix(rho0.layout, std::move(r));
}

// RK4 on dpsi/dt = -i H(t) psi with per-step renormalization.
inline StateVector evolve_schrodinger(
    const StateVector& psi0, std::pair<double, double> t_span,
    const std::function<ComplexMatrix(double)>& h_fn, double dt,
    double* norm_drift = nullptr) {
  const auto [ta, tb] = t_span;
  if (!(tb > ta)) throw std::invalid_argument("evolve_schrodinger: empty span");
  const long n = std::max<long>(1, std::lround((tb - ta) / dt));
  const double h = (tb - ta) / n;
  const Complex mi(0.0, -1.0);
  ComplexVector psi = psi0.amplitudes;
  double drift = 0.0;
  for (long i = 0; i < n; ++i) {
    const double t = ta + i * h;
    const ComplexVector k1 = mi * (h_fn(t) * psi);
    const ComplexVector k2 = mi * (h_fn(t + 0.5 * h) * (psi + 0.5 * h * k1));
    const ComplexVector k3 = mi * (h_fn(t + 0.5 * h) * (psi + 0.5 * h * k2));
    const ComplexVector k4 = mi * (h_fn(t + h) * (psi + h * k3));
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double nrm = psi.norm();
    if (!std::isfinite(nrm))
      throw std::runtime_error("evolve_schrodinger: NaN detected");
    drift = std::max(drift, std::abs(nrm - 1.0));
    psi /= nrm;
  }
  if (norm_drift) *norm_drift = drift;
  return StateVector(psi0.layout, std::move(psi));
}

struct ProtocolResult {
  DensityMatrix final_state;
  TrajectoryRecord record;
  ControlSchedule schedule;
  double dt = 0.0;
};

// Two-stage run from rho(0) = |g100><g100|: stage-1 generator on [0, T1),
// stage-2 generator (structured magnon terms active) on [T1, T2). The state
// is reused exactly at the stitch point.
inline ProtocolResult run_protocol(const SystemParams& params,
                                   const IntegratorConfig& config) {
  params.validate();
  const HilbertLayout layout = params.layout();
  const ControlSchedule schedule = build_schedule(params);
  const DissipatorSet diss = build_dissipators(params, layout);
  const double dt = config.resolved_dt(params);

  ProtocolResult out;
  out.schedule = schedule;
  out.dt = dt;
  DensityMatrix rho =
      DensityMatrix::pure(StateVector::basis(layout, {0, 1, 0, 0}));
  rho = evolve_lindblad(rho, {0.0, params.T1}, schedule, diss, config, dt,
                        &out.record, true);
  rho = evolve_lindblad(rho, {params.T1, params.T2}, schedule, diss, config,
                        dt, &out.record, false);
  out.final_state = std::move(rho);
  return out;
}

}  // namespace magnonlink

#endif  // MAGNONLINK_DYNAMICS_HPP
