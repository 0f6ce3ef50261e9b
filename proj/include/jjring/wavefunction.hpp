#pragma once

#include <string_view>
#include <utility>

#include "jjring/fourier.hpp"
#include "jjring/grid.hpp"
#include "jjring/linalg.hpp"

namespace jjring {

enum class Basis { Phase, Charge };

inline std::string_view to_string(Basis b) { return b == Basis::Phase ? "phase" : "charge"; }

/// Amplitudes on a PhaseGrid tagged with the basis they are expressed in.
class WaveFunction {
 public:
  WaveFunction(PhaseGrid grid, Basis basis) : grid_(grid), basis_(basis), amps_(grid.dim()) {}

  WaveFunction(PhaseGrid grid, Basis basis, CVector amplitudes)
      : grid_(grid), basis_(basis), amps_(std::move(amplitudes)) {
    if (amps_.size() != grid_.dim()) {
      throw ContractError("WaveFunction: amplitude count does not match grid");
    }
  }

  const PhaseGrid& grid() const noexcept { return grid_; }
  Basis basis() const noexcept { return basis_; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  const CVector& vector() const noexcept { return amps_; }

  cplx& at(int plus_index, int minus_index) { return amps_[grid_.flat(plus_index, minus_index)]; }
  cplx at(int plus_index, int minus_index) const {
    return amps_[grid_.flat(plus_index, minus_index)];
  }

  double norm() const { return jjring::norm(amps_); }

  WaveFunction& normalize() {
    const double n = norm();
    if (n == 0.0) throw ContractError("WaveFunction: cannot normalize the zero vector");
    scale(1.0 / n, amps_);
    return *this;
  }

 private:
  PhaseGrid grid_;
  Basis basis_;
  CVector amps_;
};

inline WaveFunction to_basis(const WaveFunction& wf, Basis target) {
  if (wf.basis() == target) return wf;
  WaveFunction out(wf.grid(), target);
  const auto ft = fourier_for(wf.grid());
  if (target == Basis::Phase) {
    ft->to_phase(wf.amplitudes(), out.amplitudes());
  } else {
    ft->to_charge(wf.amplitudes(), out.amplitudes());
  }
  return out;
}

inline WaveFunction fourier_to_phase(const WaveFunction& wf) {
  if (wf.basis() != Basis::Charge) throw ContractError("fourier_to_phase: input is not in charge basis");
  return to_basis(wf, Basis::Phase);
}

inline WaveFunction fourier_to_charge(const WaveFunction& wf) {
  if (wf.basis() != Basis::Phase) throw ContractError("fourier_to_charge: input is not in phase basis");
  return to_basis(wf, Basis::Charge);
}

/// Overlap <a|b>; b is converted to a's basis when they differ.
inline cplx overlap(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid() == b.grid())) throw ContractError("overlap: grids differ");
  if (a.basis() == b.basis()) return inner(a.amplitudes(), b.amplitudes());
  const WaveFunction bb = to_basis(b, a.basis());
  return inner(a.amplitudes(), bb.amplitudes());
}

}  // namespace jjring
