#pragma once

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "jjring/error.hpp"
#include "jjring/linalg.hpp"

namespace jjring {

struct ScatteringParams {
  double resonator_frequency = 1.0;  // omega_r
  double hopping = 0.5;              // g
  double linewidth = 0.35;           // Gamma
  int chirality = +1;

  void validate() const {
    if (!(linewidth > 0.0)) throw ContractError("ScatteringParams: Gamma must be > 0");
    if (!std::isfinite(hopping) || !std::isfinite(resonator_frequency)) {
      throw ContractError("ScatteringParams: non-finite parameter");
    }
    if (chirality != 1 && chirality != -1) throw ContractError("ScatteringParams: chirality must be +-1");
  }
};

struct SMatrix3 {
  Eigen::Matrix3cd entries;
  double omega = 0.0;
  ScatteringParams params;
  cplx alpha;  // diagonal entry
  cplx beta;   // off-diagonal magnitude carrier

  double unitarity_residual() const {
    return (entries * entries.adjoint() - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff();
  }
  double asymmetry() const { return (entries - entries.transpose()).cwiseAbs().maxCoeff(); }
};

/// Lorentzian weight f_k = (Gamma/3) / (i(omega - Omega_k) - Gamma/2).
inline cplx lorentz_weight(double omega, double pole, double gamma) {
  return (gamma / 3.0) / cplx(-gamma / 2.0, omega - pole);
}

/// Port scattering matrix S = 1 + sum_k f_k M_k with M_k(j, j') = exp(i 2pi k (j - j')/3).
/// Mode k = -chirality sits at omega_r + 5g; the other two at omega_r + 2g.
inline SMatrix3 smatrix(double omega, const ScatteringParams& p) {
  p.validate();
  const double upper = p.resonator_frequency + 5.0 * p.hopping;
  const double lower = p.resonator_frequency + 2.0 * p.hopping;
  SMatrix3 s;
  s.omega = omega;
  s.params = p;
  s.entries = Eigen::Matrix3cd::Identity();
  for (int k = -1; k <= 1; ++k) {
    const cplx f = lorentz_weight(omega, k == -p.chirality ? upper : lower, p.linewidth);
    for (int j = 0; j < 3; ++j) {
      for (int jp = 0; jp < 3; ++jp) s.entries(j, jp) += f * std::polar(1.0, kTwoPi * k * (j - jp) / 3.0);
    }
  }
  const cplx f5 = lorentz_weight(omega, upper, p.linewidth);
  const cplx f2 = lorentz_weight(omega, lower, p.linewidth);
  s.alpha = 1.0 + f5 + 2.0 * f2;
  s.beta = f5 - f2;
  return s;
}

/// S U^dagger with inputs reordered to (b+, b-, b3), b+- = (b1 +- b2)/sqrt2.
inline Eigen::Matrix3cd differential_basis(const SMatrix3& s) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3cd U;
  U << r, r, 0, r, -r, 0, 0, 0, 1;
  return s.entries * U.adjoint();
}

enum class DifferentialInput { Plus = 0, Minus = 1 };

/// 24 g^2 Gamma^2 / ([Gamma^2 + 4(w - w_r - 2g)^2][Gamma^2 + 4(w - w_r - 5g)^2]).
inline double port3_minus_power(double omega, const ScatteringParams& p) {
  const double G2 = p.linewidth * p.linewidth;
  const double d2 = omega - p.resonator_frequency - 2.0 * p.hopping;
  const double d5 = omega - p.resonator_frequency - 5.0 * p.hopping;
  return 24.0 * p.hopping * p.hopping * G2 / ((G2 + 4.0 * d2 * d2) * (G2 + 4.0 * d5 * d5));
}

/// 24 g^2 / (Gamma^2 + 36 g^2): the port-3 power at omega = omega_r + 2g.
inline double resonant_peak_formula(const ScatteringParams& p) {
  return 24.0 * p.hopping * p.hopping / (p.linewidth * p.linewidth + 36.0 * p.hopping * p.hopping);
}

/// Uniform grid over [omega_r - 2g - 5Gamma, omega_r + 7g + 5Gamma].
inline std::vector<double> default_omega_grid(const ScatteringParams& p, int points = 2001) {
  if (points < 2) throw ContractError("default_omega_grid: need at least 2 points");
  const double g = std::abs(p.hopping);
  const double lo = p.resonator_frequency - 2.0 * g - 5.0 * p.linewidth;
  const double hi = p.resonator_frequency + 7.0 * g + 5.0 * p.linewidth;
  std::vector<double> w(points);
  for (int i = 0; i < points; ++i) w[i] = lo + (hi - lo) * i / (points - 1);
  return w;
}

struct PortPowers {
  double omega;
  std::array<double, 3> power;
};

inline std::vector<PortPowers> output_powers(const ScatteringParams& p, DifferentialInput input,
                                             std::span<const double> omegas) {
  std::vector<PortPowers> out;
  out.reserve(omegas.size());
  const int col = static_cast<int>(input);
  for (double w : omegas) {
    const Eigen::Matrix3cd st = differential_basis(smatrix(w, p));
    out.push_back({w, {std::norm(st(0, col)), std::norm(st(1, col)), std::norm(st(2, col))}});
  }
  return out;
}

struct Directionality {
  double peak = 0.0;            // max over omega of |S~_{3-}|^2
  double argmax = 0.0;
  double at_resonance = 0.0;    // |S~_{3-}|^2 at omega_r + 2g
  double resonant_formula = 0.0;
};

/// Grid scan of |S~_{3-}|^2 followed by Brent refinement around the best point.
inline Directionality directionality(const ScatteringParams& p, int points = 2001) {
  p.validate();
  const auto grid = default_omega_grid(p, points);
  auto power = [&](double w) { return std::norm(differential_basis(smatrix(w, p))(2, 1)); };
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = power(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const auto [w, neg] = boost::math::tools::brent_find_minima([&](double x) { return -power(x); }, lo, hi, 52);
  Directionality d;
  d.peak = std::max(-neg, best_val);
  d.argmax = -neg >= best_val ? w : grid[best];
  d.at_resonance = power(p.resonator_frequency + 2.0 * p.hopping);
  d.resonant_formula = resonant_peak_formula(p);
  return d;
}

}  // namespace jjring
