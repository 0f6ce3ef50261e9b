#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "jjring/wavefunction.hpp"

namespace jjring {

// Binary layout (little-endian):
//   "JJWF" | u32 version | i32 L | u8 basis | u8 ordering | L*L * (f64 re, f64 im)
// Ordering 0 is row-major with the plus axis outermost; it is the only one written.

namespace detail {
inline constexpr char kWaveMagic[4] = {'J', 'J', 'W', 'F'};
inline constexpr std::uint32_t kWaveVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "wavefunction binary format assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ContractError("wavefunction: truncated binary stream");
  }
  return v;
}
}  // namespace detail

inline void write_binary(std::ostream& os, const WaveFunction& wf) {
  os.write(detail::kWaveMagic, 4);
  detail::put<std::uint32_t>(os, detail::kWaveVersion);
  detail::put<std::int32_t>(os, wf.grid().size());
  detail::put<std::uint8_t>(os, wf.basis() == Basis::Phase ? 0 : 1);
  detail::put<std::uint8_t>(os, 0);
  for (const auto& z : wf.amplitudes()) {
    detail::put<double>(os, z.real());
    detail::put<double>(os, z.imag());
  }
}

inline WaveFunction read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(detail::kWaveMagic, 4)) {
    throw ContractError("wavefunction: bad magic");
  }
  if (detail::get<std::uint32_t>(is) != detail::kWaveVersion) {
    throw ContractError("wavefunction: unsupported version");
  }
  const PhaseGrid grid(detail::get<std::int32_t>(is));
  const auto basis_tag = detail::get<std::uint8_t>(is);
  if (basis_tag > 1) throw ContractError("wavefunction: unknown basis tag");
  if (detail::get<std::uint8_t>(is) != 0) throw ContractError("wavefunction: unknown ordering");
  CVector amps(grid.dim());
  for (auto& z : amps) {
    const double re = detail::get<double>(is);
    const double im = detail::get<double>(is);
    z = {re, im};
  }
  return WaveFunction(grid, basis_tag == 0 ? Basis::Phase : Basis::Charge, std::move(amps));
}

/// CSV with a one-line header "# jjring-wavefunction L=<L> basis=<b> ordering=plus-major"
/// followed by "k_plus,k_minus,re,im" rows. Doubles use 17 significant digits.
inline void write_csv(std::ostream& os, const WaveFunction& wf) {
  const auto& g = wf.grid();
  os << "# jjring-wavefunction L=" << g.size() << " basis=" << to_string(wf.basis())
     << " ordering=plus-major\n";
  os << "k_plus,k_minus,re,im\n";
  char buf[128];
  for (int p = 0; p < g.size(); ++p) {
    for (int q = 0; q < g.size(); ++q) {
      const cplx z = wf.amplitudes()[std::size_t(p) * g.size() + q];
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", g.index(p), g.index(q), z.real(), z.imag());
      os << buf;
    }
  }
}

inline WaveFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ContractError("wavefunction csv: empty stream");
  std::istringstream head(line);
  std::string hash, tag, lfield, bfield, ofield;
  head >> hash >> tag >> lfield >> bfield >> ofield;
  if (hash != "#" || tag != "jjring-wavefunction" || lfield.rfind("L=", 0) != 0 ||
      ofield != "ordering=plus-major") {
    throw ContractError("wavefunction csv: bad header");
  }
  const PhaseGrid grid(std::stoi(lfield.substr(2)));
  Basis basis;
  if (bfield == "basis=phase") {
    basis = Basis::Phase;
  } else if (bfield == "basis=charge") {
    basis = Basis::Charge;
  } else {
    throw ContractError("wavefunction csv: unknown basis");
  }
  std::getline(is, line);  // column names
  WaveFunction wf(grid, basis);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int kp = 0, km = 0;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &kp, &km, &re, &im) != 4) {
      throw ContractError("wavefunction csv: malformed row");
    }
    wf.at(kp, km) = {re, im};
    ++rows;
  }
  if (rows != grid.dim()) throw ContractError("wavefunction csv: row count does not match grid");
  return wf;
}

inline void save(const std::string& path, const WaveFunction& wf) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  csv ? write_csv(os, wf) : write_binary(os, wf);
}

inline WaveFunction load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  return csv ? read_csv(is) : read_binary(is);
}

}  // namespace jjring
