#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jjring/effective.hpp"
#include "jjring/linalg.hpp"
#include "jjring/opensys.hpp"
#include "jjring/quench.hpp"
#include "jjring/scattering.hpp"

namespace jjring::app {

/// Invalid configuration: names the offending field and, when known, its line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0)
      : std::runtime_error(format(field, message, line)), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& message, int line) {
    std::string s = line > 0 ? "line " + std::to_string(line) + ": " : "";
    if (!field.empty()) s += field + ": ";
    return s + message;
  }
  std::string field_;
  int line_;
};

enum class Experiment { Spectrum, Quench, HalflifeScan, ContinuumScan, Effective, Smatrix, Lindblad };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Spectrum: return "spectrum";
    case Experiment::Quench: return "quench";
    case Experiment::HalflifeScan: return "halflife-scan";
    case Experiment::ContinuumScan: return "continuum-scan";
    case Experiment::Effective: return "effective";
    case Experiment::Smatrix: return "smatrix";
    case Experiment::Lindblad: return "lindblad";
  }
  return "?";
}

/// angular: a value in GHz is taken as rad/ns. cyclic: multiplied by 2 pi.
enum class GhzConvention { Angular, Cyclic };

struct SpectrumSettings {
  double flux_min = -3.0 * kPi;
  double flux_max = 3.0 * kPi;
  int points = 121;
  std::vector<double> ratios;  // empty: use [ring]
  int levels = 2;
};

struct QuenchConfig {
  double t_final = 0.0;  // ns; 0 selects `periods` harmonic periods
  double periods = 3.0;
  bool harmonic = false;
};

struct ScanSettings {
  std::vector<double> ratios{25, 50, 100, 200, 400};
  std::vector<int> sizes{24, 36, 48, 72, 96, 120, 144, 168, 192};
  double tolerance = 1e-3;
  double window_periods = 1.0;
  int max_extensions = 3;
};

enum class InitialExcitation { A, B, C, Antisymmetric };

struct EffectiveConfig {
  EffectiveParams params;
  bool hopping_from_junction = false;
  double junction = 0.0;  // E_J of the resonator coupling junction
  double node = 0.0;
  int total_charge = 1;
  CouplingVariant variant = CouplingVariant::Full;
  InitialExcitation initial = InitialExcitation::Antisymmetric;
  double t_final = 0.0;  // ns; 0 selects two periods 2 pi / (3|g|)
  int points = 401;
};

struct SmatrixConfig {
  ScatteringParams params;
  int points = 2001;
  std::optional<std::pair<double, double>> omega_range;
  DifferentialInput input = DifferentialInput::Minus;
  bool dump_s = false;
};

struct LindbladConfig {
  int cutoff = 4;
  ChargeBoundary boundary = ChargeBoundary::Periodic;
  RingParams ring;
  double gamma = 1.0;
  double dt = 0.1;
  double t_final = 10.0;
  double sample_interval = 0.5;
  int initial_charge = 1;
  SpecialState state = SpecialState::ChiralPlus;
  int positivity_every = 5;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Quench;
  std::uint64_t seed = 20240611;
  GhzConvention convention = GhzConvention::Angular;
  RingParams ring;  // rad/ns
  int grid_size = 48;
  EigenOptions eigen;
  PropagatorConfig propagator;  // dt = 0 selects the experiment's sample interval
  SpectrumSettings spectrum;
  QuenchConfig quench;
  ScanSettings scan;
  EffectiveConfig effective;
  SmatrixConfig smatrix;
  LindbladConfig lindblad;
  /// Every key as written, "section.key" -> value, sorted.
  std::map<std::string, std::string> entries;
  /// GHz keys converted to rad/ns.
  std::map<std::string, double> converted;

  double ghz_factor() const { return convention == GhzConvention::Cyclic ? kTwoPi : 1.0; }

  /// Sorted "section.key=value" lines; the identity of a run.
  std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : entries) {
      if (k != "run.seed") s += k + "=" + v + "\n";
    }
    s += "run.seed=" + std::to_string(seed) + "\n";
    return s;
  }
};

namespace detail {

enum class Kind { Energy, Real, Int, Bool, Text, RealList, IntList };

inline const std::map<std::string, std::map<std::string, Kind>>& schema() {
  static const std::map<std::string, std::map<std::string, Kind>> s{
      {"run", {{"experiment", Kind::Text}, {"seed", Kind::Int}}},
      {"units", {{"ghz_convention", Kind::Text}}},
      {"ring",
       {{"josephson_ghz", Kind::Energy},
        {"charging_ghz", Kind::Energy},
        {"ratio", Kind::Real},
        {"node_ghz", Kind::Energy},
        {"total_charge", Kind::Int},
        {"load_flux", Kind::Real},
        {"disorder", Kind::RealList}}},
      {"grid", {{"size", Kind::Int}}},
      {"solver",
       {{"eigen_tol", Kind::Real},
        {"basis_size", Kind::Int},
        {"max_restarts", Kind::Int},
        {"propagator", Kind::Text},
        {"krylov_dim", Kind::Int},
        {"propagator_tol", Kind::Real},
        {"dt_ns", Kind::Real}}},
      {"spectrum",
       {{"flux_min", Kind::Real},
        {"flux_max", Kind::Real},
        {"points", Kind::Int},
        {"ratios", Kind::RealList},
        {"levels", Kind::Int}}},
      {"quench", {{"t_final_ns", Kind::Real}, {"periods", Kind::Real}, {"harmonic", Kind::Bool}}},
      {"scan",
       {{"ratios", Kind::RealList},
        {"sizes", Kind::IntList},
        {"tolerance", Kind::Real},
        {"window_periods", Kind::Real},
        {"max_extensions", Kind::Int}}},
      {"effective",
       {{"resonator_ghz", Kind::Energy},
        {"hopping_ghz", Kind::Energy},
        {"junction_ghz", Kind::Energy},
        {"node_ghz", Kind::Energy},
        {"total_charge", Kind::Int},
        {"coupling", Kind::Text},
        {"chirality", Kind::Int},
        {"initial", Kind::Text},
        {"t_final_ns", Kind::Real},
        {"points", Kind::Int}}},
      {"smatrix",
       {{"resonator_ghz", Kind::Energy},
        {"hopping_ghz", Kind::Energy},
        {"linewidth_ghz", Kind::Energy},
        {"chirality", Kind::Int},
        {"points", Kind::Int},
        {"omega_min_ghz", Kind::Energy},
        {"omega_max_ghz", Kind::Energy},
        {"input", Kind::Text},
        {"dump_s", Kind::Bool}}},
      {"lindblad",
       {{"cutoff", Kind::Int},
        {"boundary", Kind::Text},
        {"josephson_ghz", Kind::Energy},
        {"charging_ghz", Kind::Energy},
        {"node_ghz", Kind::Energy},
        {"flux", Kind::Real},
        {"gamma_ghz", Kind::Energy},
        {"dt_ns", Kind::Real},
        {"t_final_ns", Kind::Real},
        {"sample_interval_ns", Kind::Real},
        {"initial_charge", Kind::Int},
        {"state", Kind::Text},
        {"positivity_every", Kind::Int}}},
  };
  return s;
}

/// Line of `key` inside `[section]` in the INI text (0 if not found).
inline int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  for (int no = 1; std::getline(in, line); ++no) {
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == ';' || line[b] == '#') continue;
    if (line[b] == '[') {
      const auto e = line.find(']', b);
      current = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
      if (key.empty() && current == section) return no;
      continue;
    }
    if (current != section || key.empty()) continue;
    const auto eq = line.find('=');
    std::string k = line.substr(b, eq == std::string::npos ? std::string::npos : eq - b);
    k.erase(k.find_last_not_of(" \t") + 1);
    if (k == key) return no;
  }
  return 0;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

class Reader {
 public:
  Reader(std::map<std::string, std::string> entries, std::string text, double ghz)
      : entries_(std::move(entries)), text_(std::move(text)), ghz_(ghz) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const auto dot = key.find('.');
    throw ConfigError(key, message, locate(text_, key.substr(0, dot), key.substr(dot + 1)));
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(key, entries_.at(key));
  }
  /// GHz value converted to rad/ns.
  double energy(const std::string& key, double fallback_rad) const {
    return has(key) ? ghz_ * parse_real(key, entries_.at(key)) : fallback_rad;
  }
  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    return parse_int(key, entries_.at(key));
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(key, "expected an unsigned integer, got '" + v + "'");
    return out;
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? entries_.at(key) : fallback;
  }
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split(key)) out.push_back(parse_real(key, item));
    return out;
  }
  std::vector<int> ints(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const auto& item : split(key)) out.push_back(int(parse_int(key, item)));
    return out;
  }

 private:
  std::vector<std::string> split(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(entries_.at(key));
    for (std::string item; std::getline(ss, item, ',');) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list element");
      out.push_back(item);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }
  double parse_real(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + v + "'");
    }
  }
  long long parse_int(const std::string& key, const std::string& v) const {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
    return out;
  }

  std::map<std::string, std::string> entries_;
  std::string text_;
  double ghz_;
};

}  // namespace detail

/// Parses and validates an INI configuration. Throws ConfigError.
inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", e.message(), int(e.line()));
  }

  ExperimentConfig cfg;
  const auto& schema = detail::schema();
  for (const auto& [section, body] : tree) {
    const auto s = schema.find(section);
    if (body.empty() || s == schema.end()) {
      const int line = body.empty() ? detail::locate(text, "", "") : detail::locate(text, section, "");
      throw ConfigError(section, body.empty() ? "keys must appear inside a [section]" : "unknown section", line);
    }
    for (const auto& [key, value] : body) {
      if (!value.empty()) throw ConfigError(section + "." + key, "nested keys are not supported");
      if (!s->second.count(key)) {
        throw ConfigError(section + "." + key, "unknown key", detail::locate(text, section, key));
      }
      cfg.entries[section + "." + key] = detail::trim(value.data());
    }
  }

  const std::string conv = cfg.entries.count("units.ghz_convention") ? cfg.entries["units.ghz_convention"] : "angular";
  if (conv == "angular") {
    cfg.convention = GhzConvention::Angular;
  } else if (conv == "cyclic") {
    cfg.convention = GhzConvention::Cyclic;
  } else {
    throw ConfigError("units.ghz_convention", "expected angular or cyclic, got '" + conv + "'",
                      detail::locate(text, "units", "ghz_convention"));
  }
  const detail::Reader r(cfg.entries, text, cfg.ghz_factor());

  if (!r.has("run.experiment")) throw ConfigError("run.experiment", "missing required key");
  const std::string exp = r.text("run.experiment", "");
  bool known = false;
  for (Experiment e : {Experiment::Spectrum, Experiment::Quench, Experiment::HalflifeScan, Experiment::ContinuumScan,
                       Experiment::Effective, Experiment::Smatrix, Experiment::Lindblad}) {
    if (exp == to_string(e)) {
      cfg.experiment = e;
      known = true;
    }
  }
  if (!known) r.fail("run.experiment", "unknown experiment '" + exp + "'");
  cfg.seed = r.unsigned_integer("run.seed", cfg.seed);

  auto checked = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ContractError& e) {
      r.fail(key, e.what());
    }
  };

  // [ring]
  RingParams& ring = cfg.ring;
  ring.josephson = r.energy("ring.josephson_ghz", 10.0 * cfg.ghz_factor());
  if (r.has("ring.ratio") && r.has("ring.charging_ghz")) r.fail("ring.ratio", "give either ratio or charging_ghz");
  ring.charging = r.has("ring.ratio") ? ring.josephson / r.real("ring.ratio", 1.0)
                                      : r.energy("ring.charging_ghz", ring.josephson / 100.0);
  ring.node = r.energy("ring.node_ghz", 0.0);
  ring.total_charge = int(r.integer("ring.total_charge", 1));
  ring.flux = r.real("ring.load_flux", kTwoPi);
  const auto disorder = r.reals("ring.disorder", {0.0, 0.0, 0.0});
  if (disorder.size() != 3) r.fail("ring.disorder", "expected three comma-separated values");
  std::copy(disorder.begin(), disorder.end(), ring.disorder.begin());
  checked("ring.josephson_ghz", [&] { ring.validate(false); });
  if (cfg.experiment == Experiment::Quench || cfg.experiment == Experiment::ContinuumScan) {
    if (std::abs(std::abs(ring.flux) - kTwoPi) > 1e-9) r.fail("ring.load_flux", "loading flux must be +-2 pi");
    ring.flux = std::copysign(kTwoPi, ring.flux);
    if (!(ring.charging > 0.0)) r.fail("ring.charging_ghz", "quench runs need E_C > 0");
  }

  // [grid], [solver]
  cfg.grid_size = int(r.integer("grid.size", cfg.grid_size));
  checked("grid.size", [&] { PhaseGrid g(cfg.grid_size); });
  cfg.eigen.tol = r.real("solver.eigen_tol", cfg.eigen.tol);
  cfg.eigen.basis_size = int(r.integer("solver.basis_size", cfg.eigen.basis_size));
  cfg.eigen.max_restarts = int(r.integer("solver.max_restarts", cfg.eigen.max_restarts));
  cfg.eigen.seed = cfg.seed;
  if (!(cfg.eigen.tol > 0.0)) r.fail("solver.eigen_tol", "must be > 0");
  if (cfg.eigen.basis_size < 4) r.fail("solver.basis_size", "must be >= 4");
  const std::string method = r.text("solver.propagator", "krylov");
  if (method == "krylov") {
    cfg.propagator.method = PropagatorMethod::Krylov;
  } else if (method == "chebyshev") {
    cfg.propagator.method = PropagatorMethod::Chebyshev;
  } else if (method == "dense") {
    cfg.propagator.method = PropagatorMethod::DenseOracle;
  } else {
    r.fail("solver.propagator", "expected krylov, chebyshev or dense, got '" + method + "'");
  }
  cfg.propagator.krylov_dim = int(r.integer("solver.krylov_dim", cfg.propagator.krylov_dim));
  cfg.propagator.tol = r.real("solver.propagator_tol", cfg.propagator.tol);
  cfg.propagator.dt = r.real("solver.dt_ns", 0.0);
  if (cfg.propagator.dt < 0.0) r.fail("solver.dt_ns", "must be >= 0");
  checked("solver.propagator_tol", [&] {
    PropagatorConfig probe = cfg.propagator;
    if (probe.dt == 0.0) probe.dt = 1.0;
    probe.validate();
  });

  // [spectrum]
  auto& sp = cfg.spectrum;
  sp.flux_min = r.real("spectrum.flux_min", sp.flux_min);
  sp.flux_max = r.real("spectrum.flux_max", sp.flux_max);
  sp.points = int(r.integer("spectrum.points", sp.points));
  sp.ratios = r.reals("spectrum.ratios", {});
  sp.levels = int(r.integer("spectrum.levels", sp.levels));
  if (!(sp.flux_max > sp.flux_min)) r.fail("spectrum.flux_max", "must exceed flux_min");
  if (sp.points < 2) r.fail("spectrum.points", "must be >= 2");
  if (sp.levels < 1) r.fail("spectrum.levels", "must be >= 1");
  for (double x : sp.ratios) {
    if (!(x > 0.0)) r.fail("spectrum.ratios", "ratios must be > 0");
  }

  // [quench]
  cfg.quench.t_final = r.real("quench.t_final_ns", 0.0);
  cfg.quench.periods = r.real("quench.periods", cfg.quench.periods);
  cfg.quench.harmonic = r.boolean("quench.harmonic", false);
  if (cfg.quench.t_final < 0.0) r.fail("quench.t_final_ns", "must be >= 0");
  if (!(cfg.quench.periods > 0.0)) r.fail("quench.periods", "must be > 0");

  // [scan]
  auto& sc = cfg.scan;
  sc.ratios = r.reals("scan.ratios", sc.ratios);
  sc.sizes = r.ints("scan.sizes", sc.sizes);
  sc.tolerance = r.real("scan.tolerance", sc.tolerance);
  sc.window_periods = r.real("scan.window_periods", sc.window_periods);
  sc.max_extensions = int(r.integer("scan.max_extensions", sc.max_extensions));
  for (double x : sc.ratios) {
    if (!(x > 0.0)) r.fail("scan.ratios", "ratios must be > 0");
  }
  for (std::size_t i = 0; i < sc.sizes.size(); ++i) {
    if (sc.sizes[i] <= 0 || sc.sizes[i] % 6 != 0 || (i > 0 && sc.sizes[i] <= sc.sizes[i - 1])) {
      r.fail("scan.sizes", "sizes must be ascending positive multiples of 6");
    }
  }
  if (!(sc.tolerance > 0.0)) r.fail("scan.tolerance", "must be > 0");
  if (!(sc.window_periods > 0.0)) r.fail("scan.window_periods", "must be > 0");

  // [effective]
  auto& ef = cfg.effective;
  ef.params.resonator_frequency = r.energy("effective.resonator_ghz", 1.0 * cfg.ghz_factor());
  ef.params.chirality = int(r.integer("effective.chirality", 1));
  ef.total_charge = int(r.integer("effective.total_charge", 1));
  ef.hopping_from_junction = r.has("effective.junction_ghz");
  if (ef.hopping_from_junction && r.has("effective.hopping_ghz")) {
    r.fail("effective.hopping_ghz", "give either hopping_ghz or junction_ghz with node_ghz");
  }
  const std::string coupling = r.text("effective.coupling", "full");
  if (coupling == "full") {
    ef.variant = CouplingVariant::Full;
  } else if (coupling == "static") {
    ef.variant = CouplingVariant::StaticLimit;
  } else {
    r.fail("effective.coupling", "expected full or static, got '" + coupling + "'");
  }
  if (ef.hopping_from_junction) {
    ef.junction = r.energy("effective.junction_ghz", 0.0);
    ef.node = r.energy("effective.node_ghz", 0.0);
    checked("effective.junction_ghz", [&] {
      ef.params.hopping = coupling_g(ef.junction, ef.node, ef.params.resonator_frequency, ef.total_charge, ef.variant);
    });
  } else {
    if (r.has("effective.node_ghz")) r.fail("effective.node_ghz", "only used together with junction_ghz");
    ef.params.hopping = r.energy("effective.hopping_ghz", 0.1 * cfg.ghz_factor());
  }
  const std::string init = r.text("effective.initial", "antisymmetric");
  if (init == "a") {
    ef.initial = InitialExcitation::A;
  } else if (init == "b") {
    ef.initial = InitialExcitation::B;
  } else if (init == "c") {
    ef.initial = InitialExcitation::C;
  } else if (init == "antisymmetric") {
    ef.initial = InitialExcitation::Antisymmetric;
  } else {
    r.fail("effective.initial", "expected a, b, c or antisymmetric, got '" + init + "'");
  }
  ef.t_final = r.real("effective.t_final_ns", 0.0);
  ef.points = int(r.integer("effective.points", ef.points));
  if (ef.t_final < 0.0) r.fail("effective.t_final_ns", "must be >= 0");
  if (ef.points < 2) r.fail("effective.points", "must be >= 2");
  checked("effective.chirality", [&] { ef.params.validate(); });

  // [smatrix]
  auto& sm = cfg.smatrix;
  sm.params.resonator_frequency = r.energy("smatrix.resonator_ghz", 1.0 * cfg.ghz_factor());
  sm.params.hopping = r.energy("smatrix.hopping_ghz", 0.5 * sm.params.resonator_frequency);
  sm.params.linewidth = r.energy("smatrix.linewidth_ghz", 0.35 * sm.params.resonator_frequency);
  sm.params.chirality = int(r.integer("smatrix.chirality", 1));
  sm.points = int(r.integer("smatrix.points", sm.points));
  if (r.has("smatrix.omega_min_ghz") != r.has("smatrix.omega_max_ghz")) {
    r.fail(r.has("smatrix.omega_min_ghz") ? "smatrix.omega_max_ghz" : "smatrix.omega_min_ghz",
           "omega_min_ghz and omega_max_ghz go together");
  }
  if (r.has("smatrix.omega_min_ghz")) {
    sm.omega_range = {r.energy("smatrix.omega_min_ghz", 0.0), r.energy("smatrix.omega_max_ghz", 0.0)};
    if (!(sm.omega_range->second > sm.omega_range->first)) r.fail("smatrix.omega_max_ghz", "must exceed omega_min_ghz");
  }
  const std::string input = r.text("smatrix.input", "minus");
  if (input == "minus") {
    sm.input = DifferentialInput::Minus;
  } else if (input == "plus") {
    sm.input = DifferentialInput::Plus;
  } else {
    r.fail("smatrix.input", "expected plus or minus, got '" + input + "'");
  }
  sm.dump_s = r.boolean("smatrix.dump_s", false);
  if (sm.points < 2) r.fail("smatrix.points", "must be >= 2");
  checked("smatrix.linewidth_ghz", [&] { sm.params.validate(); });

  // [lindblad]
  auto& lb = cfg.lindblad;
  lb.cutoff = int(r.integer("lindblad.cutoff", lb.cutoff));
  const std::string boundary = r.text("lindblad.boundary", "periodic");
  if (boundary == "periodic") {
    lb.boundary = ChargeBoundary::Periodic;
  } else if (boundary == "hard") {
    lb.boundary = ChargeBoundary::HardCutoff;
  } else {
    r.fail("lindblad.boundary", "expected periodic or hard, got '" + boundary + "'");
  }
  lb.ring.josephson = r.energy("lindblad.josephson_ghz", 1.0 * cfg.ghz_factor());
  lb.ring.charging = r.energy("lindblad.charging_ghz", 0.0);
  lb.ring.node = r.energy("lindblad.node_ghz", 0.5 * cfg.ghz_factor());
  lb.ring.flux = r.real("lindblad.flux", 0.0);
  lb.gamma = r.energy("lindblad.gamma_ghz", 1.0 * cfg.ghz_factor());
  lb.dt = r.real("lindblad.dt_ns", lb.dt);
  lb.t_final = r.real("lindblad.t_final_ns", lb.t_final);
  lb.sample_interval = r.real("lindblad.sample_interval_ns", lb.sample_interval);
  lb.initial_charge = int(r.integer("lindblad.initial_charge", lb.initial_charge));
  lb.positivity_every = int(r.integer("lindblad.positivity_every", lb.positivity_every));
  const std::string state = r.text("lindblad.state", "plus");
  if (state == "plus") {
    lb.state = SpecialState::ChiralPlus;
  } else if (state == "minus") {
    lb.state = SpecialState::ChiralMinus;
  } else if (state == "symmetric") {
    lb.state = SpecialState::Symmetric;
  } else {
    r.fail("lindblad.state", "expected plus, minus or symmetric, got '" + state + "'");
  }
  checked("lindblad.cutoff", [&] { TruncatedRingSpace probe(lb.cutoff, lb.boundary); });
  if (lb.boundary == ChargeBoundary::Periodic && lb.state != SpecialState::Symmetric && (2 * lb.cutoff + 1) % 3 != 0) {
    r.fail("lindblad.cutoff", "periodic chiral states need 2*cutoff+1 divisible by 3");
  }
  checked("lindblad.josephson_ghz", [&] { lb.ring.validate(false); });
  checked("lindblad.gamma_ghz", [&] {
    LindbladOptions o;
    o.gamma = lb.gamma;
    o.dt = lb.dt;
    o.t_final = lb.t_final;
    o.sample_interval = lb.sample_interval;
    o.validate();
  });

  for (const auto& [key, value] : cfg.entries) {
    if (detail::schema().at(key.substr(0, key.find('.'))).at(key.substr(key.find('.') + 1)) == detail::Kind::Energy) {
      cfg.converted[key.substr(0, key.size() - 4) + "_rad_per_ns"] = r.energy(key, 0.0);
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace jjring::app
