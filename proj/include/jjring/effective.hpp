#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <span>
#include <vector>

#include "jjring/error.hpp"
#include "jjring/linalg.hpp"

namespace jjring {

/// Three resonators a, b, c coupled through a ring held in a chiral state.
struct EffectiveParams {
  double resonator_frequency = 1.0;  // omega_r (rad/ns)
  double hopping = 0.1;              // g (rad/ns), sign carried explicitly
  int chirality = +1;                // +1: |N, 2pi/3, -2pi/3>, -1: its partner

  void validate() const {
    if (!(resonator_frequency > 0.0)) throw ContractError("EffectiveParams: omega_r must be > 0");
    if (!std::isfinite(hopping)) throw ContractError("EffectiveParams: g must be finite");
    if (chirality != 1 && chirality != -1) throw ContractError("EffectiveParams: chirality must be +-1");
  }
};

enum class CouplingVariant { Full, StaticLimit };
/// Half: the second-order result with the 1/2 prefactor; Unit: the same
/// expression without it. Their ratio is exactly 2.
enum class CouplingNormalization { Half, Unit };

/// g = c (E_J^r)^2 / [E_N (1 - (omega_r/E_N - 2N)^2)]; the static limit sets
/// omega_r = 0.
inline double coupling_g(double resonator_josephson, double node, double resonator_frequency, int total_charge,
                         CouplingVariant variant = CouplingVariant::Full,
                         CouplingNormalization norm = CouplingNormalization::Half) {
  if (!(node > 0.0)) throw ContractError("coupling_g: E_N must be > 0");
  const double x = variant == CouplingVariant::Full ? resonator_frequency / node : 0.0;
  const double shifted = x - 2.0 * total_charge;
  const double denom = 1.0 - shifted * shifted;
  if (std::abs(denom) < 1e-12) {
    throw ContractError("coupling_g: resonance pole, omega_r/E_N = 2N +- 1 (N = " + std::to_string(total_charge) + ")");
  }
  const double c = norm == CouplingNormalization::Half ? 0.5 : 1.0;
  return c * resonator_josephson * resonator_josephson / (node * denom);
}

/// Single-excitation hopping Hamiltonian over (a, b, c): diagonal omega_r + 3g,
/// b<-a, c<-b, a<-c hops g exp(-i 2pi/3) (conjugated for the partner state).
inline Eigen::Matrix3cd effective_hamiltonian(const EffectiveParams& p) {
  p.validate();
  const cplx hop = p.hopping * std::polar(1.0, -p.chirality * kTwoPi / 3.0);
  Eigen::Matrix3cd H = Eigen::Matrix3cd::Zero();
  H.diagonal().setConstant(p.resonator_frequency + 3.0 * p.hopping);
  H(1, 0) = hop;
  H(2, 1) = hop;
  H(0, 2) = hop;
  H(0, 1) = std::conj(hop);
  H(1, 2) = std::conj(hop);
  H(2, 0) = std::conj(hop);
  return H;
}

/// Omega_k = omega_r + 3g + 2g cos(2 pi k/3 + 2 pi/3), k = -1, 0, 1.
inline std::array<double, 3> effective_frequencies(const EffectiveParams& p) {
  std::array<double, 3> w{};
  for (int k = -1; k <= 1; ++k) {
    w[k + 1] = p.resonator_frequency + 3.0 * p.hopping + 2.0 * p.hopping * std::cos(kTwoPi * k / 3.0 + kTwoPi / 3.0);
  }
  return w;
}

using SingleExcitationState = Eigen::Vector3cd;

struct CirculationSeries {
  std::vector<double> times;
  std::vector<std::array<double, 3>> populations;  // P_a, P_b, P_c
};

/// P_i(t) = |<i| exp(-i H t) |psi0>|^2.
inline CirculationSeries circulation(const EffectiveParams& p, const SingleExcitationState& initial,
                                     std::span<const double> times) {
  if (std::abs(initial.squaredNorm() - 1.0) > 1e-12) throw ContractError("circulation: initial state is not normalized");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(effective_hamiltonian(p));
  const Eigen::Vector3cd c = es.eigenvectors().adjoint() * initial;
  CirculationSeries out;
  for (double t : times) {
    Eigen::Vector3cd ph;
    for (int i = 0; i < 3; ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * t) * c(i);
    const Eigen::Vector3cd psi = es.eigenvectors() * ph;
    out.times.push_back(t);
    out.populations.push_back({std::norm(psi(0)), std::norm(psi(1)), std::norm(psi(2))});
  }
  return out;
}

/// Resonators ordered by the time of their first local population maximum
/// after t = 0 (resonators without one go last).
inline std::array<int, 3> first_maxima_order(const CirculationSeries& s) {
  std::array<double, 3> when{};
  when.fill(std::numeric_limits<double>::infinity());
  for (int r = 0; r < 3; ++r) {
    for (std::size_t i = 1; i + 1 < s.times.size(); ++i) {
      const double a = s.populations[i - 1][r], b = s.populations[i][r], c = s.populations[i + 1][r];
      if (b > a && b >= c) {
        when[r] = s.times[i];
        break;
      }
    }
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return when[x] < when[y]; });
  return order;
}

}  // namespace jjring
