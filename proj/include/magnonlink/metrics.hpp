// SPDX-License-Identifier: Apache-2.0
//
// State scoring: fidelity to pure targets (with and without a relative-phase
// audit), bipartite negativity, and logical-state populations.

#ifndef MAGNONLINK_METRICS_HPP
#define MAGNONLINK_METRICS_HPP

#include <algorithm>
#include <map>
#include <string>

#include "magnonlink/model.hpp"
#include "magnonlink/tensor.hpp"

namespace magnonlink {

inline double fidelity(const DensityMatrix& rho, const StateVector& target) {
  if (!(rho.layout == target.layout))
    throw std::invalid_argument("fidelity: layout mismatch");
  return (target.amplitudes.adjoint() * rho.matrix * target.amplitudes)(0, 0)
      .real();
}

// Bell-type target (|a> + phase |b>)/sqrt(2) built from two orthonormal
// full-space kets.
struct BellTarget {
  StateVector ket_a;
  StateVector ket_b;
  Complex relative_phase = 1.0;

  StateVector state() const {
    ComplexVector v =
        (ket_a.amplitudes + relative_phase * ket_b.amplitudes) / std::sqrt(2.0);
    return StateVector(ket_a.layout, std::move(v));
  }
};

struct PhaseAuditedFidelity {
  double F_best = 0.0;
  Complex phase_best = 1.0;
};

// Maximize <psi(phi)|rho|psi(phi)> over the relative phase of the target.
// Closed form: the optimum aligns phi with the off-diagonal element <a|rho|b>.
inline PhaseAuditedFidelity fidelity_up_to_phase(const DensityMatrix& rho,
                                                 const BellTarget& target) {
  if (!(rho.layout == target.ket_a.layout))
    throw std::invalid_argument("fidelity_up_to_phase: layout mismatch");
  const ComplexVector& a = target.ket_a.amplitudes;
  const ComplexVector& b = target.ket_b.amplitudes;
  const double paa = (a.adjoint() * rho.matrix * a)(0, 0).real();
  const double pbb = (b.adjoint() * rho.matrix * b)(0, 0).real();
  const Complex off = (a.adjoint() * rho.matrix * b)(0, 0);
  PhaseAuditedFidelity out;
  out.phase_best = std::abs(off) > 0.0 ? std::conj(off) / std::abs(off)
                                       : Complex(1.0, 0.0);
  out.F_best = 0.5 * (paa + pbb) + std::abs(off);
  return out;
}

// N = (||rho^{T_A}||_1 - 1)/2 on the reduction to the given subsystem pair;
// the partial transpose acts on the first pair member. Clipped at zero from
// below; the clip amount is returned separately.
struct NegativityResult {
  double value = 0.0;
  double clipped = 0.0;  // amount removed by the zero clip
};

inline NegativityResult negativity_detail(const DensityMatrix& rho,
                                          std::pair<int, int> pair) {
  if (pair.first == pair.second)
    throw std::invalid_argument("negativity: pair members must differ");
  DensityMatrix reduced = partial_trace(rho, {pair.first, pair.second});
  // partial_trace keeps original subsystem order; locate the first pair member
  const int pos = pair.first < pair.second ? 0 : 1;
  const ComplexMatrix pt = partial_transpose(reduced, pos);
  const double raw = 0.5 * (trace_norm(pt) - 1.0);
  NegativityResult out;
  out.value = std::max(0.0, raw);
  out.clipped = out.value - raw;
  return out;
}

inline double negativity(const DensityMatrix& rho, std::pair<int, int> pair) {
  return negativity_detail(rho, pair).value;
}

// Populations of the four single-excitation logical kets.
inline std::map<std::string, double> logical_populations(
    const DensityMatrix& rho) {
  const HilbertLayout& lay = rho.layout;
  std::map<std::string, double> out;
  out["P_e000"] = rho.matrix(lay.flat_index({1, 0, 0, 0}),
                             lay.flat_index({1, 0, 0, 0})).real();
  out["P_g100"] = rho.matrix(lay.flat_index({0, 1, 0, 0}),
                             lay.flat_index({0, 1, 0, 0})).real();
  out["P_g010"] = rho.matrix(lay.flat_index({0, 0, 1, 0}),
                             lay.flat_index({0, 0, 1, 0})).real();
  out["P_g001"] = rho.matrix(lay.flat_index({0, 0, 0, 1}),
                             lay.flat_index({0, 0, 0, 1})).real();
  return out;
}

}  // namespace magnonlink

#endif  // MAGNONLINK_METRICS_HPP
