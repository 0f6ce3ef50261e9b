#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "jjring/parallel.hpp"
#include "jjring/ring.hpp"
#include "jjring/solver/propagate.hpp"

namespace jjring {

/// First downward crossing of I(0)/2, linearly interpolated. Absent when the
/// series never crosses.
inline std::optional<double> half_life(std::span<const double> t, std::span<const double> current) {
  if (t.empty() || t.size() != current.size()) throw ContractError("half_life: empty or mismatched series");
  if (!(current[0] > 0.0)) throw ContractError("half_life: I(0) must be positive");
  const double half = 0.5 * current[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (current[i - 1] > half && current[i] <= half) {
      const double f = (current[i - 1] - half) / (current[i - 1] - current[i]);
      return t[i - 1] + f * (t[i] - t[i - 1]);
    }
  }
  return std::nullopt;
}

struct QuenchSettings {
  EigenOptions eigen;
  PropagatorConfig propagator;  // dt = 0 selects the sample interval
  bool harmonic = false;        // load and evolve with the quadratic potential
};

struct QuenchSample {
  double t;        // ns
  double current;  // <I_ch> in units of I_0
  double norm;
  double energy;   // <H(phi_e = 0)>
};

struct LoadedState {
  WaveFunction state;
  double energy = 0.0;
  double chirality = 0.0;
  double residual = 0.0;
};

struct QuenchRun {
  RingParams params;
  int grid_size = 0;
  bool harmonic = false;
  double sample_interval = 0.0;
  std::vector<QuenchSample> series;
  std::optional<double> tau;
  double load_energy = 0.0;
  double load_chirality = 0.0;
  double load_residual = 0.0;
  double static_current = 0.0;  // <I_ch> on the loaded state before propagation
  double max_energy_drift = 0.0;  // relative
  std::uint64_t seed = 0;
  double eigen_tol = 0.0;
  double propagator_tol = 0.0;
};

/// 1/40 of a harmonic period 2 pi / sqrt(12 E_J E_C).
inline double sample_interval(const RingParams& p) {
  if (!(p.charging > 0.0)) throw ContractError("sample_interval: E_C must be > 0");
  return kTwoPi / std::sqrt(12.0 * p.josephson * p.charging) / 40.0;
}

inline LinearMap evolution_hamiltonian(const RingParams& p, const PhaseGrid& grid, bool harmonic) {
  return harmonic ? build_harmonic_hamiltonian(p, grid) : build_hamiltonian(p, grid);
}

/// Ground state of H(phi_e = +-2pi). Throws NumericalError when the state does
/// not carry the expected chirality.
inline LoadedState load_chiral_state(const RingParams& p, const PhaseGrid& grid, const EigenOptions& opt = {},
                                     bool harmonic = false) {
  if (std::abs(std::abs(p.flux) - kTwoPi) > 1e-12) {
    throw ContractError("load_chiral_state: loading flux must be +-2 pi");
  }
  const EigenResult r = harmonic ? lowest_eigenpairs(build_harmonic_hamiltonian(p, grid), opt)
                                 : ring_eigenpairs(p, grid, opt);
  const Basis basis = harmonic ? Basis::Phase : Basis::Charge;
  LoadedState out{WaveFunction(grid, basis, r.eigenvectors[0]), r.eigenvalues[0], 0.0, r.residuals[0]};
  out.chirality = expectation(chirality_chi(grid, p.total_charge), out.state).real();
  const double s = std::abs(std::sin(kTwoPi * p.total_charge / 3.0));
  if (p.total_charge % 3 != 0 && !(std::abs(out.chirality) > 0.1 * s)) {
    throw NumericalError("load_chiral_state: loaded state is not chiral (<chi> = " +
                         std::to_string(out.chirality) + ")");
  }
  return out;
}

/// Loads at p.flux (+-2pi), switches the flux to 0 and records <I_ch>(t).
inline QuenchRun run_quench(const RingParams& p, const PhaseGrid& grid, double t_final,
                            const QuenchSettings& settings = {}) {
  QuenchRun run;
  run.params = p;
  run.grid_size = grid.size();
  run.harmonic = settings.harmonic;
  run.sample_interval = sample_interval(p);
  run.seed = settings.eigen.seed;
  run.eigen_tol = settings.eigen.tol;
  run.propagator_tol = settings.propagator.tol;
  const LoadedState loaded = load_chiral_state(p, grid, settings.eigen, settings.harmonic);
  run.load_energy = loaded.energy;
  run.load_chirality = loaded.chirality;
  run.load_residual = loaded.residual;

  const RingParams after = p.with_flux(0.0);
  const LinearMap H = evolution_hamiltonian(after, grid, settings.harmonic);
  const LinearMap current = chiral_current_map(grid, 0.0);
  run.static_current = expectation(current, loaded.state).real();

  PropagatorConfig cfg = settings.propagator;
  if (cfg.dt == 0.0) cfg.dt = run.sample_interval;
  if (cfg.method == PropagatorMethod::Chebyshev && !cfg.spectral_bounds && !settings.harmonic) {
    cfg.spectral_bounds = spectral_bounds(after, grid);
  }

  CVector psi = loaded.state.vector();
  scale(1.0 / norm(psi), psi);
  const Basis basis = H.basis();
  double e0 = 0.0;
  propagate(H, psi, uniform_times(t_final, run.sample_interval), cfg, [&](double t, std::span<const cplx> s) {
    const WaveFunction wf(grid, basis, CVector(s.begin(), s.end()));
    const double e = inner(s, H(s)).real();
    if (run.series.empty()) e0 = e;
    run.max_energy_drift = std::max(run.max_energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    run.series.push_back({t, expectation(current, wf).real(), wf.norm(), e});
  });

  std::vector<double> t, I;
  for (const auto& s : run.series) {
    t.push_back(s.t);
    I.push_back(s.current);
  }
  if (!I.empty() && I.front() > 0.0) run.tau = half_life(t, I);
  return run;
}

/// Angular frequency pi / (t2 - t1) from the first two sign changes of the
/// current; absent with fewer than two crossings.
inline std::optional<double> oscillation_frequency(std::span<const QuenchSample> series) {
  std::vector<double> zeros;
  for (std::size_t i = 1; i < series.size() && zeros.size() < 2; ++i) {
    const double a = series[i - 1].current, b = series[i].current;
    if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
      zeros.push_back(series[i - 1].t + a / (a - b) * (series[i].t - series[i - 1].t));
    }
  }
  if (zeros.size() < 2) return std::nullopt;
  return kPi / (zeros[1] - zeros[0]);
}

/// Largest current after the first half-life crossing, relative to I(0).
inline double max_revival(const QuenchRun& run) {
  if (!run.tau || run.series.empty()) return 0.0;
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : run.series) {
    if (s.t > *run.tau) m = std::max(m, s.current);
  }
  return m / run.series.front().current;
}

struct ContinuumReport {
  std::vector<int> sizes;
  std::vector<QuenchRun> runs;
  std::vector<double> deviations;  // max |I_L(t) - I_L'(t)| between consecutive sizes
  std::optional<int> converged_size;
  double tolerance = 1e-3;
};

/// Quenches at increasing L and declares L* as the larger size of the first
/// consecutive pair whose currents agree within `tolerance`.
inline ContinuumReport continuum_scan(const RingParams& p, std::span<const int> sizes, double t_final,
                                      const QuenchSettings& settings = {}, double tolerance = 1e-3,
                                      bool stop_when_converged = true) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] % 6 != 0 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw ContractError("continuum_scan: sizes must be ascending multiples of 6");
    }
  }
  ContinuumReport rep;
  rep.tolerance = tolerance;
  for (int L : sizes) {
    rep.sizes.push_back(L);
    rep.runs.push_back(run_quench(p, PhaseGrid(L), t_final, settings));
    if (rep.runs.size() >= 2) {
      const auto& a = rep.runs[rep.runs.size() - 2].series;
      const auto& b = rep.runs.back().series;
      double dev = 0.0;
      for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        dev = std::max(dev, std::abs(a[i].current - b[i].current));
      }
      rep.deviations.push_back(dev);
      if (!rep.converged_size && dev < tolerance) {
        rep.converged_size = L;
        if (stop_when_converged) break;
      }
    }
  }
  return rep;
}

struct PowerLawFit {
  double alpha = 0.0;
  double tau0 = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // over (alpha, ln tau0)
  std::vector<std::pair<double, double>> points;          // (E_J/E_C, tau)
  std::vector<double> residuals;                          // ln tau - fit
  double alpha_stderr() const { return std::sqrt(covariance(0, 0)); }
};

/// Ordinary least squares on (ln ratio, ln tau).
inline PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 3) throw ContractError("fit_power_law: need at least 3 points");
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [r, tau] = points[i];
    if (!(r > 0.0) || !(tau > 0.0)) throw ContractError("fit_power_law: points must be positive");
    X(i, 0) = std::log(r);
    X(i, 1) = 1.0;
    y(i) = std::log(tau);
  }
  const double spread = X.col(0).maxCoeff() - X.col(0).minCoeff();
  if (spread <= 1e-12 * std::max(1.0, X.col(0).cwiseAbs().maxCoeff())) {
    throw ContractError("fit_power_law: degenerate abscissae");
  }
  const Eigen::Matrix2d xtx = X.transpose() * X;
  const Eigen::Vector2d beta = xtx.ldlt().solve(X.transpose() * y);
  PowerLawFit fit;
  fit.alpha = beta(0);
  fit.tau0 = std::exp(beta(1));
  fit.points.assign(points.begin(), points.end());
  const Eigen::VectorXd res = y - X * beta;
  fit.residuals.assign(res.data(), res.data() + n);
  const double sigma2 = n > 2 ? res.squaredNorm() / double(n - 2) : 0.0;
  fit.covariance = sigma2 * xtx.inverse();
  return fit;
}

struct HalfLifePoint {
  double ratio = 0.0;
  int converged_size = 0;
  double tau = 0.0;
  ContinuumReport scan;
};

struct HalfLifeScanOptions {
  std::vector<double> ratios{25, 50, 100, 200, 400};
  double josephson = 10.0;
  double node = 0.0;
  int total_charge = 1;
  std::vector<int> sizes{24, 36, 48, 72, 96, 120, 144, 168, 192};
  double tolerance = 1e-3;
  double window_periods = 1.0;  // initial t_final in harmonic periods 2pi/sqrt(12 E_J E_C)
  int max_extensions = 3;       // t_final doubles while no crossing is found
  unsigned threads = 1;
  QuenchSettings settings;
};

/// Half-life at each ratio on its converged grid. Points run concurrently.
inline std::vector<HalfLifePoint> halflife_scan(const HalfLifeScanOptions& o) {
  return parallel_map(o.ratios.size(), o.threads, [&](std::size_t i) {
    RingParams p;
    p.josephson = o.josephson;
    p.charging = o.josephson / o.ratios[i];
    p.node = o.node;
    p.total_charge = o.total_charge;
    p.flux = kTwoPi;
    double t_final = o.window_periods * 40.0 * sample_interval(p);
    for (int ext = 0;; ++ext) {
      ContinuumReport rep = continuum_scan(p, o.sizes, t_final, o.settings, o.tolerance);
      if (!rep.converged_size) {
        throw NumericalError("halflife_scan: no converged grid size at E_J/E_C = " + std::to_string(o.ratios[i]));
      }
      const auto& run = rep.runs.back();
      if (run.tau) return HalfLifePoint{o.ratios[i], *rep.converged_size, *run.tau, std::move(rep)};
      if (ext >= o.max_extensions) {
        throw NumericalError("halflife_scan: no half-life crossing at E_J/E_C = " + std::to_string(o.ratios[i]));
      }
      t_final *= 2.0;
    }
  });
}

}  // namespace jjring
