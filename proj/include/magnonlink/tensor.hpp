// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra over small tensor-product Hilbert spaces:
// composite operator construction, partial trace / partial transpose and
// Hermitian spectral utilities used by the entanglement metrics.

#ifndef MAGNONLINK_TENSOR_HPP
#define MAGNONLINK_TENSOR_HPP

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace magnonlink {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Ordered subsystem dimensions. The ordering (qubit, cavity, local magnon,
// remote magnon) is fixed for a whole run; embed/trace operations address
// subsystems by index into this list.
struct HilbertLayout {
  std::vector<int> dims;

  HilbertLayout() = default;
  explicit HilbertLayout(std::vector<int> d) : dims(std::move(d)) {
    for (int x : dims) {
      if (x < 2) throw std::invalid_argument("HilbertLayout: every dim must be >= 2");
    }
  }

  // Standard (q, c, m_L, m_R) layout with a common bosonic truncation.
  static HilbertLayout standard(int truncation = 2) {
    return HilbertLayout({2, truncation, truncation, truncation});
  }

  int size() const { return static_cast<int>(dims.size()); }

  int total_dim() const {
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
  }

  bool operator==(const HilbertLayout& o) const { return dims == o.dims; }

  // Row-major flat index of a multi-index (occupation per subsystem).
  int flat_index(const std::vector<int>& multi) const {
    if (multi.size() != dims.size())
      throw std::invalid_argument("flat_index: rank mismatch");
    int idx = 0;
    for (size_t k = 0; k < dims.size(); ++k) {
      if (multi[k] < 0 || multi[k] >= dims[k])
        throw std::out_of_range("flat_index: occupation out of range");
      idx = idx * dims[k] + multi[k];
    }
    return idx;
  }
};

struct StateVector {
  HilbertLayout layout;
  ComplexVector amplitudes;

  StateVector() = default;
  StateVector(HilbertLayout lay, ComplexVector amps)
      : layout(std::move(lay)), amplitudes(std::move(amps)) {
    if (amplitudes.size() != layout.total_dim())
      throw std::invalid_argument("StateVector: amplitude length != total_dim");
  }

  // Basis ket |n0 n1 n2 n3>.
  static StateVector basis(const HilbertLayout& lay, const std::vector<int>& occ) {
    ComplexVector v = ComplexVector::Zero(lay.total_dim());
    v(lay.flat_index(occ)) = 1.0;
    return StateVector(lay, std::move(v));
  }

  double norm() const { return amplitudes.norm(); }
};

struct DensityMatrix {
  HilbertLayout layout;
  ComplexMatrix matrix;

  DensityMatrix() = default;
  DensityMatrix(HilbertLayout lay, ComplexMatrix m)
      : layout(std::move(lay)), matrix(std::move(m)) {
    if (matrix.rows() != layout.total_dim() || matrix.cols() != layout.total_dim())
      throw std::invalid_argument("DensityMatrix: size != total_dim");
  }

  static DensityMatrix pure(const StateVector& psi) {
    return DensityMatrix(psi.layout,
                         psi.amplitudes * psi.amplitudes.adjoint());
  }

  double trace_real() const { return matrix.trace().real(); }

  double hermiticity_error() const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  }
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("kron: inputs must be square");
  const long na = a.rows(), nb = b.rows();
  ComplexMatrix out(na * nb, na * nb);
  for (long i = 0; i < na; ++i)
    for (long j = 0; j < na; ++j)
      out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
  return out;
}

// op acting on one subsystem, identity elsewhere, respecting layout order.
inline ComplexMatrix embed(const ComplexMatrix& op, int subsystem_index,
                           const HilbertLayout& layout) {
  if (subsystem_index < 0 || subsystem_index >= layout.size())
    throw std::out_of_range("embed: subsystem index out of range");
  if (op.rows() != layout.dims[subsystem_index] ||
      op.cols() != layout.dims[subsystem_index])
    throw std::invalid_argument("embed: operator dim != subsystem dim");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int k = 0; k < layout.size(); ++k) {
    if (k == subsystem_index)
      out = kron(out, op);
    else
      out = kron(out, ComplexMatrix::Identity(layout.dims[k], layout.dims[k]));
  }
  return out;
}

// Reduced density matrix on the kept subsystems (original relative order).
inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  const auto& dims = rho.layout.dims;
  const int n = rho.layout.size();
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw std::out_of_range("partial_trace: bad index");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate index");
    kept[k] = true;
  }
  std::vector<int> keep_sorted, out_dims, traced;
  for (int k = 0; k < n; ++k) {
    if (kept[k]) {
      keep_sorted.push_back(k);
      out_dims.push_back(dims[k]);
    } else {
      traced.push_back(k);
    }
  }
  HilbertLayout out_layout(out_dims);
  const int dk = out_layout.total_dim();
  int dt = 1;
  for (int k : traced) dt *= dims[k];

  // strides of each subsystem in the flat index
  std::vector<int> stride(n, 1);
  for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];

  auto offset = [&](const std::vector<int>& subs, int flat) {
    // decompose flat over subs' dims, return full-space offset
    int off = 0;
    for (int s = static_cast<int>(subs.size()) - 1; s >= 0; --s) {
      int d = dims[subs[s]];
      off += (flat % d) * stride[subs[s]];
      flat /= d;
    }
    return off;
  };

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i) {
    const int oi = offset(keep_sorted, i);
    for (int j = 0; j < dk; ++j) {
      const int oj = offset(keep_sorted, j);
      Complex s = 0.0;
      for (int t = 0; t < dt; ++t) {
        const int ot = offset(traced, t);
        s += rho.matrix(oi + ot, oj + ot);
      }
      out(i, j) = s;
    }
  }
  return DensityMatrix(std::move(out_layout), std::move(out));
}

// Transpose the indices of one factor of a bipartite state.
inline ComplexMatrix partial_transpose(const DensityMatrix& rho,
                                       int transpose_subsystem) {
  if (rho.layout.size() != 2)
    throw std::invalid_argument("partial_transpose: layout must be bipartite");
  if (transpose_subsystem < 0 || transpose_subsystem > 1)
    throw std::out_of_range("partial_transpose: bad subsystem");
  const int da = rho.layout.dims[0], db = rho.layout.dims[1];
  ComplexMatrix out(da * db, da * db);
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int ap = 0; ap < da; ++ap)
        for (int bp = 0; bp < db; ++bp) {
          if (transpose_subsystem == 0)
            out(a * db + b, ap * db + bp) = rho.matrix(ap * db + b, a * db + bp);
          else
            out(a * db + b, ap * db + bp) = rho.matrix(a * db + bp, ap * db + b);
        }
  return out;
}

constexpr double kHermitianTol = 1e-10;

inline void require_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  const double err = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (err > tol)
    throw std::invalid_argument("matrix not Hermitian (error " +
                                std::to_string(err) + ")");
}

// Eigenvalues ascending; eigenvector columns phase-fixed so the first
// component above tolerance is real positive.
inline std::pair<RealVector, ComplexMatrix> hermitian_eigensystem(
    const ComplexMatrix& m) {
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigensystem: no convergence");
  RealVector vals = solver.eigenvalues();
  ComplexMatrix vecs = solver.eigenvectors();
  for (long c = 0; c < vecs.cols(); ++c) {
    for (long r = 0; r < vecs.rows(); ++r) {
      const Complex x = vecs(r, c);
      if (std::abs(x) > 1e-12) {
        vecs.col(c) *= std::conj(x) / std::abs(x);
        break;
      }
    }
  }
  return {std::move(vals), std::move(vecs)};
}

// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& m) {
  auto [vals, vecs] = hermitian_eigensystem(m);
  (void)vecs;
  return vals.cwiseAbs().sum();
}

}  // namespace magnonlink

#endif  // MAGNONLINK_TENSOR_HPP
