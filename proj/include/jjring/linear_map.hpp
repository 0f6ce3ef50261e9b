#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>

#include "jjring/wavefunction.hpp"

namespace jjring {

/// Matrix-free operator acting on vectors expressed in a fixed basis.
class LinearMap {
 public:
  using Kernel = std::function<void(std::span<const cplx>, std::span<cplx>)>;

  LinearMap(std::size_t dim, Basis basis, bool hermitian, Kernel kernel)
      : dim_(dim), basis_(basis), hermitian_(hermitian), kernel_(std::move(kernel)) {
    if (dim_ == 0) throw ContractError("LinearMap: zero dimension");
    if (!kernel_) throw ContractError("LinearMap: empty kernel");
  }

  std::size_t dim() const noexcept { return dim_; }
  Basis basis() const noexcept { return basis_; }
  bool hermitian() const noexcept { return hermitian_; }

  void apply(std::span<const cplx> in, std::span<cplx> out) const {
    if (in.size() != dim_ || out.size() != dim_) {
      throw ContractError("LinearMap: vector size does not match operator dimension");
    }
    kernel_(in, out);
  }

  CVector operator()(std::span<const cplx> in) const {
    CVector out(dim_);
    apply(in, out);
    return out;
  }

 private:
  std::size_t dim_;
  Basis basis_;
  bool hermitian_;
  Kernel kernel_;
};

/// (a o b)(x) = a(b(x)).
inline LinearMap compose(LinearMap a, LinearMap b) {
  if (a.dim() != b.dim() || a.basis() != b.basis()) {
    throw ContractError("compose: operators act on different spaces");
  }
  const auto dim = a.dim();
  return LinearMap(dim, a.basis(), false, [a, b, dim](std::span<const cplx> in, std::span<cplx> out) {
    CVector tmp(dim);
    b.apply(in, tmp);
    a.apply(tmp, out);
  });
}

/// c_a * a + c_b * b; hermitian if both are and the coefficients are real.
inline LinearMap combine(cplx ca, LinearMap a, cplx cb, LinearMap b) {
  if (a.dim() != b.dim() || a.basis() != b.basis()) {
    throw ContractError("combine: operators act on different spaces");
  }
  const bool herm = a.hermitian() && b.hermitian() && ca.imag() == 0.0 && cb.imag() == 0.0;
  const auto dim = a.dim();
  return LinearMap(dim, a.basis(), herm, [=](std::span<const cplx> in, std::span<cplx> out) {
    CVector tmp(dim);
    a.apply(in, out);
    b.apply(in, tmp);
    for (std::size_t i = 0; i < dim; ++i) out[i] = ca * out[i] + cb * tmp[i];
  });
}

/// Phase-basis operator expressed in the charge basis (or vice versa).
inline LinearMap change_basis(LinearMap op, const PhaseGrid& grid, Basis target) {
  if (op.basis() == target) return op;
  if (op.dim() != grid.dim()) throw ContractError("change_basis: operator does not live on grid");
  auto ft = fourier_for(grid);
  return LinearMap(op.dim(), target, op.hermitian(),
                   [op, ft, target](std::span<const cplx> in, std::span<cplx> out) {
                     CVector a(in.size()), b(in.size());
                     if (target == Basis::Charge) {
                       ft->to_phase(in, a);
                       op.apply(a, b);
                       ft->to_charge(b, out);
                     } else {
                       ft->to_charge(in, a);
                       op.apply(a, b);
                       ft->to_phase(b, out);
                     }
                   });
}

inline WaveFunction apply(const LinearMap& op, const WaveFunction& wf) {
  const WaveFunction src = to_basis(wf, op.basis());
  WaveFunction out(wf.grid(), op.basis());
  op.apply(src.amplitudes(), out.amplitudes());
  return out;
}

/// <psi|op|psi> / <psi|psi>.
inline cplx expectation(const LinearMap& op, const WaveFunction& wf) {
  const WaveFunction src = to_basis(wf, op.basis());
  CVector out(op.dim());
  op.apply(src.amplitudes(), out);
  return inner(src.amplitudes(), out) / norm2(src.amplitudes());
}

/// Column-by-column dense matrix; intended for small operators and tests.
inline Eigen::MatrixXcd to_dense(const LinearMap& op, std::size_t max_dim = 4096) {
  if (op.dim() > max_dim) throw ContractError("to_dense: operator too large");
  const auto n = static_cast<Eigen::Index>(op.dim());
  Eigen::MatrixXcd m(n, n);
  CVector e(op.dim()), col(op.dim());
  for (Eigen::Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), cplx{});
    e[j] = 1.0;
    op.apply(e, col);
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = col[i];
  }
  return m;
}

/// max |<u|A v> - <A u|v>| / (|u||v|) over a few seeded random pairs.
inline double hermiticity_defect(const LinearMap& op, int trials = 3, std::uint64_t seed = 7) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const CVector u = random_vector(op.dim(), seed + 2 * t);
    const CVector v = random_vector(op.dim(), seed + 2 * t + 1);
    const CVector au = op(u), av = op(v);
    const double d = std::abs(inner(u, av) - inner(au, v)) / (norm(u) * norm(v));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace jjring
