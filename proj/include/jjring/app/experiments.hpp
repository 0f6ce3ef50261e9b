#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "jjring/app/config.hpp"
#include "jjring/app/output.hpp"
#include "jjring/solver/dense.hpp"

namespace jjring::app {

struct ExperimentOutput {
  CsvTable data{{}};
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json verify;  // null unless requested
  bool verify_passed = true;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

inline QuenchSettings quench_settings(const ExperimentConfig& cfg, bool harmonic) {
  QuenchSettings s;
  s.eigen = cfg.eigen;
  s.propagator = cfg.propagator;
  s.harmonic = harmonic;
  return s;
}

inline double harmonic_period(const RingParams& p) { return kTwoPi / std::sqrt(12.0 * p.josephson * p.charging); }

/// Lanczos and Krylov results against dense diagonalization on a small grid.
inline nlohmann::json verify_ring(const ExperimentConfig& cfg, const RingParams& params, int grid_size,
                                  bool& passed) {
  const PhaseGrid grid(std::min(grid_size, 24));
  RingParams p = params;
  const LinearMap H = build_hamiltonian(p, grid);
  const Eigen::MatrixXcd full = to_dense(H);
  std::vector<Eigen::Index> keep;
  for (int a = grid.min_index(); a <= grid.max_index(); ++a) {
    for (int b = grid.min_index(); b <= grid.max_index(); ++b) {
      if ((a + b) % 2 == 0) keep.push_back(Eigen::Index(grid.flat(a, b)));
    }
  }
  const Eigen::MatrixXcd sector = full(keep, keep);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sector);
  EigenOptions opt = cfg.eigen;
  opt.count = 2;
  const EigenResult r = ring_eigenpairs(p, grid, opt);
  double eig_err = 0.0;
  for (int i = 0; i < 2; ++i) {
    eig_err = std::max(eig_err, std::abs(r.eigenvalues[i] - es.eigenvalues()(i)) /
                                    std::max(1.0, std::abs(es.eigenvalues()(i))));
  }

  const LinearMap H0 = build_hamiltonian(p.with_flux(0.0), grid);
  const DenseSpectrum sp = dense_spectrum(H0);
  CVector psi = r.eigenvectors[0];
  const double t = 10.0 / p.josephson;
  const CVector ref = dense_evolve(sp, psi, t);
  PropagatorConfig pc = cfg.propagator;
  if (pc.dt == 0.0) pc.dt = t / 10.0;
  if (pc.method == PropagatorMethod::Chebyshev) pc.spectral_bounds = spectral_bounds(p.with_flux(0.0), grid);
  propagate(H0, psi, std::vector<double>{0.0, t}, pc);
  const double prop_err = max_abs_diff(psi, ref) / norm(ref);

  passed = eig_err <= 1e-8 && prop_err <= 1e-8;
  return {{"grid_size", grid.size()},
          {"eigenvalue_rel_error", eig_err},
          {"propagation_rel_error", prop_err},
          {"tolerance", 1e-8},
          {"passed", passed}};
}

inline ExperimentOutput run_spectrum(const ExperimentConfig& cfg, unsigned threads, bool verify) {
  const auto& s = cfg.spectrum;
  std::vector<double> ratios = s.ratios;
  if (ratios.empty()) ratios.push_back(cfg.ring.josephson / cfg.ring.charging);
  const PhaseGrid grid(cfg.grid_size);
  const auto fluxes = linspace(s.flux_min, s.flux_max, s.points);
  ExperimentOutput out;
  out.data = CsvTable({"ratio", "phi_e", "level", "energy", "I_ch", "chi"});
  nlohmann::json per_ratio = nlohmann::json::array();
  for (double ratio : ratios) {
    RingParams p = cfg.ring;
    p.charging = p.josephson / ratio;
    EigenOptions opt = cfg.eigen;
    opt.count = s.levels;
    struct Level {
      double energy, current, chi;
    };
    const LinearMap chi = chirality_chi(grid, p.total_charge);
    const auto rows = parallel_map(fluxes.size(), threads, [&](std::size_t i) {
      const RingParams q = p.with_flux(fluxes[i]);
      const EigenResult r = ring_eigenpairs(q, grid, opt);
      const LinearMap current = chiral_current_map(grid, fluxes[i]);
      std::vector<Level> levels;
      for (int k = 0; k < s.levels; ++k) {
        const WaveFunction wf(grid, Basis::Charge, r.eigenvectors[k]);
        levels.push_back({r.eigenvalues[k], expectation(current, wf).real(), expectation(chi, wf).real()});
      }
      return levels;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (int k = 0; k < s.levels; ++k) {
        out.data.row({ratio, fluxes[i], double(k), rows[i][k].energy, rows[i][k].current, rows[i][k].chi});
      }
    }
    per_ratio.push_back({{"ratio", ratio}, {"charging_rad_per_ns", p.charging}});
  }
  out.summary = {{"grid_size", cfg.grid_size}, {"points", s.points}, {"ratios", per_ratio}};
  if (verify) out.verify = verify_ring(cfg, cfg.ring, cfg.grid_size, out.verify_passed);
  return out;
}

inline ExperimentOutput run_quench_experiment(const ExperimentConfig& cfg, bool verify) {
  const RingParams& p = cfg.ring;
  const double t_final = cfg.quench.t_final > 0.0 ? cfg.quench.t_final : cfg.quench.periods * harmonic_period(p);
  const QuenchRun run = run_quench(p, PhaseGrid(cfg.grid_size), t_final, quench_settings(cfg, cfg.quench.harmonic));
  ExperimentOutput out;
  out.data = CsvTable({"t_ns", "I_ch", "norm", "energy"});
  for (const auto& s : run.series) out.data.row({s.t, s.current, s.norm, s.energy});
  const auto freq = oscillation_frequency(run.series);
  out.summary = {{"grid_size", run.grid_size},
                 {"harmonic", run.harmonic},
                 {"t_final_ns", t_final},
                 {"sample_interval_ns", run.sample_interval},
                 {"tau_ns", run.tau ? nlohmann::json(*run.tau) : nlohmann::json()},
                 {"oscillation_frequency", freq ? nlohmann::json(*freq) : nlohmann::json()},
                 {"harmonic_frequency", std::sqrt(12.0 * p.josephson * p.charging)},
                 {"static_current", run.static_current},
                 {"load_energy", run.load_energy},
                 {"load_chirality", run.load_chirality},
                 {"load_residual", run.load_residual},
                 {"max_energy_drift", run.max_energy_drift}};
  if (verify) {
    if (cfg.quench.harmonic) {
      out.verify = {{"skipped", "dense cross-check covers the full Hamiltonian only"}};
    } else {
      out.verify = verify_ring(cfg, p, cfg.grid_size, out.verify_passed);
    }
  }
  return out;
}

inline ExperimentOutput run_halflife_scan(const ExperimentConfig& cfg, unsigned threads, bool verify) {
  HalfLifeScanOptions o;
  o.ratios = cfg.scan.ratios;
  o.sizes = cfg.scan.sizes;
  o.josephson = cfg.ring.josephson;
  o.node = cfg.ring.node;
  o.total_charge = cfg.ring.total_charge;
  o.tolerance = cfg.scan.tolerance;
  o.window_periods = cfg.scan.window_periods;
  o.max_extensions = cfg.scan.max_extensions;
  o.threads = threads;
  o.settings = quench_settings(cfg, false);
  const auto points = halflife_scan(o);

  ExperimentOutput out;
  out.data = CsvTable({"ratio", "L_star", "tau_ns", "alpha_running"});
  std::vector<std::pair<double, double>> xy;
  nlohmann::json scans = nlohmann::json::array();
  for (const auto& pt : points) {
    xy.emplace_back(pt.ratio, pt.tau);
    const double alpha = xy.size() >= 3 ? fit_power_law(xy).alpha : std::numeric_limits<double>::quiet_NaN();
    out.data.row({pt.ratio, double(pt.converged_size), pt.tau, alpha});
    scans.push_back({{"ratio", pt.ratio}, {"sizes", pt.scan.sizes}, {"deviations", pt.scan.deviations}});
  }
  if (xy.size() >= 3) {
    const PowerLawFit fit = fit_power_law(xy);
    out.summary["alpha"] = fit.alpha;
    out.summary["alpha_stderr"] = fit.alpha_stderr();
    out.summary["tau0_ns"] = fit.tau0;
    out.summary["residuals"] = fit.residuals;
  }
  out.summary["continuum"] = scans;
  if (verify) {
    RingParams p = cfg.ring;
    p.charging = p.josephson / cfg.scan.ratios.front();
    p.flux = kTwoPi;
    out.verify = verify_ring(cfg, p, cfg.scan.sizes.front(), out.verify_passed);
  }
  return out;
}

inline ExperimentOutput run_continuum_scan(const ExperimentConfig& cfg, bool verify) {
  const RingParams& p = cfg.ring;
  const double t_final = cfg.quench.t_final > 0.0 ? cfg.quench.t_final : cfg.quench.periods * harmonic_period(p);
  const ContinuumReport rep =
      continuum_scan(p, cfg.scan.sizes, t_final, quench_settings(cfg, false), cfg.scan.tolerance, false);
  ExperimentOutput out;
  out.data = CsvTable({"L", "t_ns", "I_ch"});
  nlohmann::json taus = nlohmann::json::array();
  for (const auto& run : rep.runs) {
    for (const auto& s : run.series) out.data.row({double(run.grid_size), s.t, s.current});
    taus.push_back(run.tau ? nlohmann::json(*run.tau) : nlohmann::json());
  }
  out.summary = {{"sizes", rep.sizes},
                 {"deviations", rep.deviations},
                 {"tolerance", rep.tolerance},
                 {"tau_ns", taus},
                 {"converged_size", rep.converged_size ? nlohmann::json(*rep.converged_size) : nlohmann::json()},
                 {"t_final_ns", t_final}};
  if (verify) out.verify = verify_ring(cfg, p, cfg.scan.sizes.front(), out.verify_passed);
  return out;
}

inline SingleExcitationState initial_excitation(InitialExcitation e) {
  switch (e) {
    case InitialExcitation::A: return SingleExcitationState::Unit(0);
    case InitialExcitation::B: return SingleExcitationState::Unit(1);
    case InitialExcitation::C: return SingleExcitationState::Unit(2);
    case InitialExcitation::Antisymmetric: return SingleExcitationState(1.0, -1.0, 0.0) / std::sqrt(2.0);
  }
  throw ContractError("initial_excitation: unknown state");
}

inline ExperimentOutput run_effective(const ExperimentConfig& cfg, bool verify) {
  const auto& e = cfg.effective;
  if (e.params.hopping == 0.0 && e.t_final == 0.0) {
    throw ContractError("effective: zero hopping needs an explicit t_final_ns");
  }
  const double t_final = e.t_final > 0.0 ? e.t_final : 2.0 * kTwoPi / (3.0 * std::abs(e.params.hopping));
  const auto times = linspace(0.0, t_final, e.points);
  const SingleExcitationState psi0 = initial_excitation(e.initial);
  const CirculationSeries series = circulation(e.params, psi0, times);
  ExperimentOutput out;
  out.data = CsvTable({"t", "P_a", "P_b", "P_c"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& P = series.populations[i];
    out.data.row({times[i], P[0], P[1], P[2]});
  }
  const auto freqs = effective_frequencies(e.params);
  const auto order = first_maxima_order(series);
  out.summary = {{"hopping_rad_per_ns", e.params.hopping},
                 {"resonator_rad_per_ns", e.params.resonator_frequency},
                 {"frequencies", freqs},
                 {"first_maxima_order", std::string{"abc"[order[0]], "abc"[order[1]], "abc"[order[2]]}},
                 {"t_final_ns", t_final}};
  if (e.hopping_from_junction) out.summary["coupling"] = e.variant == CouplingVariant::Full ? "full" : "static";
  if (verify) {
    const Eigen::Matrix3cd H = effective_hamiltonian(e.params);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Eigen::Vector3cd psi = (cplx(0, -times[i]) * H).exp() * psi0;
      for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(std::norm(psi(k)) - series.populations[i][k]));
    }
    out.verify_passed = err <= 1e-10;
    out.verify = {{"matrix_exponential_max_error", err}, {"tolerance", 1e-10}, {"passed", out.verify_passed}};
  }
  return out;
}

inline ExperimentOutput run_smatrix(const ExperimentConfig& cfg, bool verify) {
  const auto& s = cfg.smatrix;
  const auto omegas = s.omega_range ? linspace(s.omega_range->first, s.omega_range->second, s.points)
                                    : default_omega_grid(s.params, s.points);
  std::vector<std::string> cols{"omega", "P1", "P2", "P3"};
  if (s.dump_s) {
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        const std::string n = "S" + std::to_string(i) + std::to_string(j);
        cols.push_back(n + "_re");
        cols.push_back(n + "_im");
      }
    }
  }
  ExperimentOutput out;
  out.data = CsvTable(cols);
  const auto powers = output_powers(s.params, s.input, omegas);
  double unitarity = 0.0;
  std::vector<double> row;
  for (const auto& pw : powers) {
    const SMatrix3 S = smatrix(pw.omega, s.params);
    unitarity = std::max(unitarity, S.unitarity_residual());
    row = {pw.omega, pw.power[0], pw.power[1], pw.power[2]};
    if (s.dump_s) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          row.push_back(S.entries(i, j).real());
          row.push_back(S.entries(i, j).imag());
        }
      }
    }
    out.data.row(row);
  }
  const Directionality d = directionality(s.params, s.points);
  out.summary = {{"input", s.input == DifferentialInput::Minus ? "minus" : "plus"},
                 {"directionality_peak", d.peak},
                 {"directionality_argmax", d.argmax},
                 {"directionality_at_resonance", d.at_resonance},
                 {"resonant_formula", d.resonant_formula},
                 {"max_unitarity_residual", unitarity}};
  if (verify) {
    out.verify_passed = unitarity <= 1e-12;
    out.verify = {{"max_unitarity_residual", unitarity}, {"tolerance", 1e-12}, {"passed", out.verify_passed}};
  }
  return out;
}

inline ExperimentOutput run_lindblad(const ExperimentConfig& cfg, bool verify) {
  const auto& l = cfg.lindblad;
  const TruncatedRingSpace space(l.cutoff, l.boundary);
  const SparseOperator H = ring_hamiltonian(space, l.ring);
  double phi2 = 0.0, phi3 = 0.0;
  if (l.state == SpecialState::ChiralPlus) {
    phi2 = kTwoPi / 3;
    phi3 = -kTwoPi / 3;
  } else if (l.state == SpecialState::ChiralMinus) {
    phi2 = -kTwoPi / 3;
    phi3 = kTwoPi / 3;
  }
  const auto rho0 = DensityMatrix::pure(plane_wave(space, l.initial_charge, phi2, phi3));
  LindbladOptions opt;
  opt.gamma = l.gamma;
  opt.t_final = l.t_final;
  opt.dt = l.dt;
  opt.sample_interval = l.sample_interval;
  opt.positivity_every = l.positivity_every;
  opt.reference_phases = std::pair{phi2, phi3};
  const LindbladResult res = lindblad_evolve(space, rho0, H, opt);

  std::vector<std::string> cols{"t", "trace", "purity"};
  for (int q : res.sectors) cols.push_back("pop_N" + std::to_string(q));
  for (int q : res.sectors) cols.push_back("chi_N" + std::to_string(q));
  ExperimentOutput out;
  out.data = CsvTable(cols);
  double trace_err = 0.0, worst_overlap = 1.0;
  for (const auto& s : res.samples) {
    std::vector<double> row{s.t, s.trace, s.purity};
    row.insert(row.end(), s.population.begin(), s.population.end());
    row.insert(row.end(), s.chirality.begin(), s.chirality.end());
    out.data.row(row);
    trace_err = std::max(trace_err, std::abs(s.trace - 1.0));
    for (std::size_t q = 0; q < s.population.size(); ++q) {
      if (s.population[q] > 1e-12) worst_overlap = std::min(worst_overlap, s.overlap_fraction[q]);
    }
  }
  out.summary = {{"dimension", space.dim()},
                 {"boundary", l.boundary == ChargeBoundary::Periodic ? "periodic" : "hard"},
                 {"sectors", res.sectors},
                 {"max_trace_error", trace_err},
                 {"min_sector_overlap", worst_overlap},
                 {"final_purity", res.samples.back().purity}};
  if (verify) {
    bool ok = true;
    std::string why;
    try {
      res.final_state.validate();
    } catch (const ContractError& e) {
      ok = false;
      why = e.what();
    }
    out.verify_passed = ok;
    out.verify = {{"final_state_valid", ok}, {"passed", ok}};
    if (!ok) out.verify["reason"] = why;
  }
  return out;
}

}  // namespace detail

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg, unsigned threads, bool verify) {
  switch (cfg.experiment) {
    case Experiment::Spectrum: return detail::run_spectrum(cfg, threads, verify);
    case Experiment::Quench: return detail::run_quench_experiment(cfg, verify);
    case Experiment::HalflifeScan: return detail::run_halflife_scan(cfg, threads, verify);
    case Experiment::ContinuumScan: return detail::run_continuum_scan(cfg, verify);
    case Experiment::Effective: return detail::run_effective(cfg, verify);
    case Experiment::Smatrix: return detail::run_smatrix(cfg, verify);
    case Experiment::Lindblad: return detail::run_lindblad(cfg, verify);
  }
  throw ContractError("run_experiment: unknown experiment");
}

}  // namespace jjring::app
