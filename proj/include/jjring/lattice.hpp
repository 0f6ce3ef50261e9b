#pragma once

#include "jjring/fourier.hpp"
#include "jjring/grid.hpp"
#include "jjring/linear_map.hpp"
#include "jjring/wavefunction.hpp"

namespace jjring {

enum class Axis { Plus, Minus };

/// Cyclic translation of the phase grid: a state peaked at index k moves to
/// k + steps along the chosen axis.
inline LinearMap shift_operator(const PhaseGrid& grid, Axis axis, int steps) {
  const int L = grid.size();
  const int s = ((steps % L) + L) % L;
  return LinearMap(grid.dim(), Basis::Phase, s == 0,
                   [L, s, axis](std::span<const cplx> in, std::span<cplx> out) {
                     for (int p = 0; p < L; ++p) {
                       for (int q = 0; q < L; ++q) {
                         const int sp = axis == Axis::Plus ? (p - s + L) % L : p;
                         const int sq = axis == Axis::Minus ? (q - s + L) % L : q;
                         out[std::size_t(p) * L + q] = in[std::size_t(sp) * L + sq];
                       }
                     }
                   });
}

/// The same translation written in the charge basis: multiplication by
/// exp(-i 2 pi steps n / L) on the chosen axis.
inline LinearMap charge_shift_operator(const PhaseGrid& grid, Axis axis, int steps) {
  const int L = grid.size();
  std::vector<cplx> factor(L);
  for (int p = 0; p < L; ++p) factor[p] = std::polar(1.0, -kTwoPi * steps * grid.index(p) / L);
  return LinearMap(grid.dim(), Basis::Charge, steps % L == 0,
                   [L, axis, factor](std::span<const cplx> in, std::span<cplx> out) {
                     for (int p = 0; p < L; ++p) {
                       for (int q = 0; q < L; ++q) {
                         const std::size_t i = std::size_t(p) * L + q;
                         out[i] = in[i] * factor[axis == Axis::Plus ? p : q];
                       }
                     }
                   });
}

/// Phase-basis diagonal operator with entries f(phi_plus, phi_minus).
template <class F>
LinearMap diag_operator(const PhaseGrid& grid, F&& f) {
  const int L = grid.size();
  auto diag = std::make_shared<CVector>(grid.dim());
  bool real = true;
  for (int p = 0; p < L; ++p) {
    for (int q = 0; q < L; ++q) {
      const cplx v = f(grid.phase(grid.index(p)), grid.phase(grid.index(q)));
      (*diag)[std::size_t(p) * L + q] = v;
      real = real && v.imag() == 0.0;
    }
  }
  return LinearMap(grid.dim(), Basis::Phase, real,
                   [diag](std::span<const cplx> in, std::span<cplx> out) {
                     for (std::size_t i = 0; i < in.size(); ++i) out[i] = (*diag)[i] * in[i];
                   });
}

}  // namespace jjring
