#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "jjring/lattice.hpp"
#include "jjring/solver/lanczos.hpp"

namespace jjring {

/// Physical constants of the three-junction ring. Energies in rad/ns (hbar = 1).
struct RingParams {
  double josephson = 10.0;  // E_J
  double charging = 0.1;    // E_C
  double node = 0.0;        // E_N
  int total_charge = 1;     // N
  double flux = 0.0;        // phi_e in radians
  std::array<double, 3> disorder{0.0, 0.0, 0.0};  // additive per-junction E_J offsets

  /// Throws ContractError on invalid values; with `enforce_regime` also
  /// requires E_N/E_J >= 10 and E_J/E_C >= 10.
  void validate(bool enforce_regime = false) const {
    if (!(josephson > 0.0)) throw ContractError("RingParams: E_J must be > 0");
    if (!(charging >= 0.0)) throw ContractError("RingParams: E_C must be >= 0");
    if (!(node >= 0.0)) throw ContractError("RingParams: E_N must be >= 0");
    if (!std::isfinite(flux)) throw ContractError("RingParams: flux must be finite");
    for (double e : junction_energies()) {
      if (!(e > 0.0)) throw ContractError("RingParams: disordered junction energy must stay > 0");
    }
    if (enforce_regime) {
      if (node < 10.0 * josephson) throw ContractError("RingParams: regime requires E_N/E_J >= 10");
      if (charging > 0.1 * josephson) throw ContractError("RingParams: regime requires E_J/E_C >= 10");
    }
  }

  std::array<double, 3> junction_energies() const {
    return {josephson + disorder[0], josephson + disorder[1], josephson + disorder[2]};
  }

  RingParams with_flux(double phi_e) const {
    RingParams p = *this;
    p.flux = phi_e;
    return p;
  }
};

/// Harmonic-oscillator scales of the transmon-regime expansion.
struct HarmonicParams {
  double omega = 0.0;         // sqrt(12 E_J E_C)
  double displacement = 0.0;  // (phi_e / sqrt3) (E_C / 3E_J)^(1/4)
  double mean_excitations() const { return displacement * displacement; }
};

inline HarmonicParams harmonic_params(const RingParams& p) {
  p.validate();
  return {std::sqrt(12.0 * p.josephson * p.charging),
          p.flux / std::sqrt(3.0) * std::pow(p.charging / (3.0 * p.josephson), 0.25)};
}

inline double constant_energy(const RingParams& p) {
  return (p.node + p.charging / 3.0) * p.total_charge * p.total_charge;
}

inline double kinetic_energy(const RingParams& p, int n_plus, int n_minus) {
  const double shifted = n_plus - 2.0 * p.total_charge / 3.0;
  return 0.5 * p.charging * (3.0 * shifted * shifted + double(n_minus) * n_minus);
}

/// Josephson potential; junction i couples phase differences
/// (phi2), (phi3 - phi2), (-phi3) with phi2 = phi+ + phi-, phi3 = phi+ - phi-.
inline double josephson_potential(const RingParams& p, double phi_plus, double phi_minus) {
  const auto ej = p.junction_energies();
  const double a = p.flux / 3.0;
  return -(ej[0] * std::cos(phi_plus + phi_minus - a) + ej[1] * std::cos(2.0 * phi_minus + a) +
           ej[2] * std::cos(phi_plus - phi_minus + a));
}

inline double chiral_current(double phi_plus, double phi_minus, double phi_e) {
  const double a = phi_e / 3.0;
  return 2.0 * std::cos(phi_plus) * std::sin(phi_minus - a) - std::sin(2.0 * phi_minus + a);
}

/// Full ring Hamiltonian, applied in the charge basis: diagonal kinetic term
/// plus the potential cosines as nearest-neighbour charge hops.
inline LinearMap build_hamiltonian(const RingParams& p, const PhaseGrid& grid) {
  p.validate();
  const int L = grid.size();
  auto diag = std::make_shared<std::vector<double>>(grid.dim());
  const double c0 = constant_energy(p);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      (*diag)[std::size_t(i) * L + j] = c0 + kinetic_energy(p, grid.index(i), grid.index(j));
    }
  }
  const auto ej = p.junction_energies();
  const double a = p.flux / 3.0;
  struct Hop {
    int dp, dm;
    cplx c;
  };
  // out(n + d) += c * in(n)
  const std::array<Hop, 6> hops{{
      {1, 1, -0.5 * ej[0] * std::polar(1.0, -a)},
      {-1, -1, -0.5 * ej[0] * std::polar(1.0, a)},
      {0, 2, -0.5 * ej[1] * std::polar(1.0, a)},
      {0, -2, -0.5 * ej[1] * std::polar(1.0, -a)},
      {1, -1, -0.5 * ej[2] * std::polar(1.0, a)},
      {-1, 1, -0.5 * ej[2] * std::polar(1.0, -a)},
  }};
  // Wrapped source rows/columns per hop, so the apply loop is division free.
  auto rows = std::make_shared<std::array<std::vector<int>, 6>>();
  auto cols = std::make_shared<std::array<std::vector<int>, 6>>();
  for (std::size_t h = 0; h < hops.size(); ++h) {
    (*rows)[h].resize(L);
    (*cols)[h].resize(L);
    for (int i = 0; i < L; ++i) {
      (*rows)[h][i] = ((i - hops[h].dp) % L + L) % L * L;
      (*cols)[h][i] = ((i - hops[h].dm) % L + L) % L;
    }
  }
  return LinearMap(grid.dim(), Basis::Charge, true,
                   [L, diag, hops, rows, cols](std::span<const cplx> in, std::span<cplx> out) {
                     for (int i = 0; i < L; ++i) {
                       const std::size_t base = std::size_t(i) * L;
                       for (int j = 0; j < L; ++j) out[base + j] = (*diag)[base + j] * in[base + j];
                       for (std::size_t h = 0; h < hops.size(); ++h) {
                         const cplx c = hops[h].c;
                         const cplx* src = in.data() + (*rows)[h][i];
                         const int* col = (*cols)[h].data();
                         for (int j = 0; j < L; ++j) out[base + j] += c * src[col[j]];
                       }
                     }
                   });
}

inline double wrap_angle(double x) {
  double y = std::remainder(x, kTwoPi);
  if (y <= -kPi) y += kTwoPi;
  return y;
}

/// Quadratic expansion of the potential around phi+ = 0, phi- = phi_e/3, applied
/// in the phase basis (kinetic part through the Fourier transform).
inline LinearMap build_harmonic_hamiltonian(const RingParams& p, const PhaseGrid& grid) {
  p.validate();
  const int L = grid.size();
  auto kin = std::make_shared<std::vector<double>>(grid.dim());
  auto pot = std::make_shared<std::vector<double>>(grid.dim());
  const double c0 = constant_energy(p);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      const std::size_t d = std::size_t(i) * L + j;
      (*kin)[d] = c0 + kinetic_energy(p, grid.index(i), grid.index(j));
      const double pp = grid.phase(grid.index(i));
      const double pm = wrap_angle(grid.phase(grid.index(j)) - p.flux / 3.0);
      (*pot)[d] = p.josephson * (pp * pp + 3.0 * pm * pm);
    }
  }
  auto ft = fourier_for(grid);
  return LinearMap(grid.dim(), Basis::Phase, true,
                   [kin, pot, ft](std::span<const cplx> in, std::span<cplx> out) {
                     CVector c(in.size());
                     ft->to_charge(in, c);
                     for (std::size_t i = 0; i < c.size(); ++i) c[i] *= (*kin)[i];
                     ft->to_phase(c, out);
                     for (std::size_t i = 0; i < c.size(); ++i) out[i] += (*pot)[i] * in[i];
                   });
}

/// Closed interval containing the spectrum of build_hamiltonian(p, grid).
inline std::pair<double, double> spectral_bounds(const RingParams& p, const PhaseGrid& grid) {
  const auto ej = p.junction_energies();
  const double pot = std::abs(ej[0]) + std::abs(ej[1]) + std::abs(ej[2]);
  double kmin = kinetic_energy(p, 0, 0), kmax = kmin;
  for (int n = grid.min_index(); n <= grid.max_index(); ++n) {
    for (int m : {grid.min_index(), 0, grid.max_index()}) {
      kmin = std::min(kmin, kinetic_energy(p, n, m));
      kmax = std::max(kmax, kinetic_energy(p, n, m));
    }
  }
  const double c0 = constant_energy(p);
  return {c0 + kmin - pot, c0 + kmax + pot};
}

inline LinearMap chiral_current_map(const PhaseGrid& grid, double phi_e) {
  return diag_operator(grid, [phi_e](double pp, double pm) { return cplx(chiral_current(pp, pm, phi_e)); });
}

/// Cyclic node permutation as the phase-basis clock exp(2 i N phi-).
inline LinearMap permutation_p123(const PhaseGrid& grid, int total_charge) {
  if (grid.size() % 3 != 0) throw ContractError("permutation_p123: L must be divisible by 3");
  return diag_operator(grid, [total_charge](double, double pm) { return std::polar(1.0, 2.0 * total_charge * pm); });
}

/// chi = (P123 - P132) / 2i = sin(2 N phi-).
inline LinearMap chirality_chi(const PhaseGrid& grid, int total_charge) {
  if (grid.size() % 3 != 0) throw ContractError("chirality_chi: L must be divisible by 3");
  return diag_operator(grid, [total_charge](double, double pm) { return cplx(std::sin(2.0 * total_charge * pm)); });
}

/// phi- -> -phi- in the phase basis.
inline LinearMap parity_map(const PhaseGrid& grid) {
  const int L = grid.size();
  return LinearMap(grid.dim(), Basis::Phase, true, [grid, L](std::span<const cplx> in, std::span<cplx> out) {
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        const int k = grid.index(j);
        out[std::size_t(i) * L + j] = in[std::size_t(i) * L + grid.position(-k)];
      }
    }
  });
}

/// Projector onto n+ + n- even; the physical states of the ring.
inline LinearMap physical_sector_projector(const PhaseGrid& grid) {
  const int L = grid.size();
  return LinearMap(grid.dim(), Basis::Charge, true, [grid, L](std::span<const cplx> in, std::span<cplx> out) {
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        const std::size_t d = std::size_t(i) * L + j;
        out[d] = ((grid.index(i) + grid.index(j)) % 2 == 0) ? in[d] : cplx{};
      }
    }
  });
}

/// Grid representative of |N, phi2, phi3>: the charge plane wave on the physical
/// sector, i.e. equal-weight deltas at (phi+, phi-) and (phi+ + pi, phi- + pi).
inline WaveFunction plane_wave_state(const PhaseGrid& grid, double phi2, double phi3) {
  const int L = grid.size();
  auto to_index = [&](double phi) {
    const double k = phi * L / kTwoPi;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-9) throw ContractError("plane_wave_state: phase is not on the grid");
    return static_cast<int>(r);
  };
  const int kp = to_index(0.5 * (phi2 + phi3));
  const int km = to_index(0.5 * (phi2 - phi3));
  WaveFunction wf(grid, Basis::Phase);
  wf.at(kp, km) += 1.0 / std::sqrt(2.0);
  wf.at(kp + L / 2, km + L / 2) += 1.0 / std::sqrt(2.0);
  return wf;
}

enum class SpecialState { Symmetric, ChiralPlus, ChiralMinus };

/// |N,0,0>, |N,2pi/3,-2pi/3>, |N,-2pi/3,2pi/3>.
inline WaveFunction special_state(const PhaseGrid& grid, SpecialState s) {
  switch (s) {
    case SpecialState::Symmetric: return plane_wave_state(grid, 0.0, 0.0);
    case SpecialState::ChiralPlus: return plane_wave_state(grid, kTwoPi / 3, -kTwoPi / 3);
    case SpecialState::ChiralMinus: return plane_wave_state(grid, -kTwoPi / 3, kTwoPi / 3);
  }
  throw ContractError("special_state: unknown state");
}

/// Ground-state energy of the full Hamiltonian in the physical sector.
inline EigenResult ring_eigenpairs(const RingParams& p, const PhaseGrid& grid, EigenOptions opt = {}) {
  opt.projector = physical_sector_projector(grid);
  return lowest_eigenpairs(build_hamiltonian(p, grid), opt);
}

struct FluxFluctuation {
  double analytic = 0.0;  // E_J dphi^2 / 6
  double exact = 0.0;     // 3 E_J (1 - cos(dphi/3)), the potential-minimum shift
  std::optional<double> numeric;
};

/// Energy shift of the chiral ground state when the loading flux misses 2pi by
/// delta. With a grid the shift is also eigensolved; E_C is taken from `p`.
inline FluxFluctuation flux_fluctuation_energy(const RingParams& p, double delta,
                                               const PhaseGrid* grid = nullptr,
                                               const EigenOptions& opt = {}) {
  if (std::abs(delta) > kPi / 2) throw ContractError("flux_fluctuation_energy: |delta| must be <= pi/2");
  FluxFluctuation out;
  out.analytic = p.josephson * delta * delta / 6.0;
  out.exact = 3.0 * p.josephson * (1.0 - std::cos(delta / 3.0));
  if (grid) {
    const double e0 = ring_eigenpairs(p.with_flux(kTwoPi), *grid, opt).eigenvalues[0];
    const double e1 = ring_eigenpairs(p.with_flux(kTwoPi + delta), *grid, opt).eigenvalues[0];
    out.numeric = e1 - e0;
  }
  return out;
}

struct DisorderCheck {
  Eigen::Matrix3cd matrix;  // <s_i|V|s_j> over |N,0,0>, chiral +, chiral -
  double max_off_diagonal = 0.0;
};

/// Projects the (possibly disordered) Josephson potential onto the three special
/// grid states.
inline DisorderCheck disorder_diagonality_check(const PhaseGrid& grid, const RingParams& p) {
  p.validate();
  const LinearMap V = diag_operator(grid, [&p](double pp, double pm) { return cplx(josephson_potential(p, pp, pm)); });
  const std::array<WaveFunction, 3> s{special_state(grid, SpecialState::Symmetric),
                                      special_state(grid, SpecialState::ChiralPlus),
                                      special_state(grid, SpecialState::ChiralMinus)};
  DisorderCheck out;
  for (int j = 0; j < 3; ++j) {
    const WaveFunction vj = apply(V, s[j]);
    for (int i = 0; i < 3; ++i) {
      out.matrix(i, j) = overlap(s[i], vj);
      if (i != j) out.max_off_diagonal = std::max(out.max_off_diagonal, std::abs(out.matrix(i, j)));
    }
  }
  return out;
}

}  // namespace jjring
