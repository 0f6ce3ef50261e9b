#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "jjring/error.hpp"
#include "jjring/linalg.hpp"
#include "jjring/ring.hpp"

namespace jjring {

/// HardCutoff: |n_i| <= n_max with amplitudes pushed past the edge dropped.
/// Periodic: node charges taken mod 2 n_max + 1, so charge shifts are unitary.
enum class ChargeBoundary { HardCutoff, Periodic };

/// Three-node charge basis (n1, n2, n3), enumerated with n3 fastest.
class TruncatedRingSpace {
 public:
  static constexpr std::size_t kDefaultCap = 15 * 15 * 15;

  explicit TruncatedRingSpace(int cutoff, ChargeBoundary boundary = ChargeBoundary::HardCutoff,
                              std::size_t cap = kDefaultCap)
      : cutoff_(cutoff), modulus_(2 * cutoff + 1), boundary_(boundary) {
    if (cutoff < 1) throw ContractError("TruncatedRingSpace: cutoff must be >= 1");
    if (dim() > cap) throw ContractError("TruncatedRingSpace: dimension exceeds cap");
  }

  int cutoff() const noexcept { return cutoff_; }
  int modulus() const noexcept { return modulus_; }
  ChargeBoundary boundary() const noexcept { return boundary_; }
  std::size_t dim() const noexcept { return std::size_t(modulus_) * modulus_ * modulus_; }

  std::array<int, 3> charges(std::size_t i) const {
    const int m = modulus_;
    return {int(i / (m * m)) - cutoff_, int(i / m % m) - cutoff_, int(i % m) - cutoff_};
  }

  std::size_t index(const std::array<int, 3>& n) const {
    std::size_t i = 0;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(n[k]) > cutoff_) throw ContractError("TruncatedRingSpace: charge outside cutoff");
      i = i * modulus_ + std::size_t(n[k] + cutoff_);
    }
    return i;
  }

  /// State with charge at `node` (0-based) moved by delta; absent past a hard edge.
  std::optional<std::size_t> shifted(std::size_t i, int node, int delta) const {
    auto n = charges(i);
    n[node] += delta;
    if (std::abs(n[node]) > cutoff_) {
      if (boundary_ == ChargeBoundary::HardCutoff) return std::nullopt;
      n[node] = wrap(n[node]);
    }
    return index(n);
  }

  /// Total charge; for the periodic boundary the centred residue mod 2 n_max + 1.
  int sector(std::size_t i) const {
    const auto n = charges(i);
    const int total = n[0] + n[1] + n[2];
    return boundary_ == ChargeBoundary::Periodic ? wrap(total) : total;
  }

  std::vector<int> sectors() const {
    std::vector<int> s;
    if (boundary_ == ChargeBoundary::Periodic) {
      for (int q = -cutoff_; q <= cutoff_; ++q) s.push_back(q);
    } else {
      for (int q = -3 * cutoff_; q <= 3 * cutoff_; ++q) s.push_back(q);
    }
    return s;
  }

  int wrap(int n) const {
    int r = ((n + cutoff_) % modulus_ + modulus_) % modulus_;
    return r - cutoff_;
  }

 private:
  int cutoff_;
  int modulus_;
  ChargeBoundary boundary_;
};

using SparseOperator = Eigen::SparseMatrix<cplx>;

/// E_N N^2 + E_C sum n_i^2 - sum_i E_Ji cos(dphi_i - phi_e/3) with
/// dphi = (phi2 - phi1, phi3 - phi2, phi1 - phi3); exp(i phi_k) raises n_k.
inline SparseOperator ring_hamiltonian(const TruncatedRingSpace& space, const RingParams& p) {
  p.validate();
  const auto ej = p.junction_energies();
  const double a = p.flux / 3.0;
  // Junction i raises node up[i] and lowers node down[i].
  constexpr std::array<int, 3> up{1, 2, 0}, down{0, 1, 2};
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto n = space.charges(i);
    const double q = space.sector(i);
    trip.emplace_back(i, i, p.node * q * q + p.charging * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]));
    for (int j = 0; j < 3; ++j) {
      const auto mid = space.shifted(i, down[j], -1);
      if (!mid) continue;
      const auto dst = space.shifted(*mid, up[j], +1);
      if (!dst) continue;
      const cplx c = -0.5 * ej[j] * std::polar(1.0, -a);
      trip.emplace_back(*dst, i, c);
      trip.emplace_back(i, *dst, std::conj(c));
    }
  }
  SparseOperator H(space.dim(), space.dim());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

/// Cyclic node permutation |n1, n2, n3> -> |n2, n3, n1>.
inline SparseOperator node_permutation(const TruncatedRingSpace& space) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto n = space.charges(i);
    trip.emplace_back(space.index({n[1], n[2], n[0]}), i, 1.0);
  }
  SparseOperator P(space.dim(), space.dim());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

/// (P123 - P132) / 2i on the three-node space.
inline SparseOperator chirality_operator(const TruncatedRingSpace& space) {
  const SparseOperator P = node_permutation(space);
  const SparseOperator Pd = SparseOperator(P.adjoint());
  return SparseOperator((P - Pd) * cplx(0.0, -0.5));
}

/// Normalized |N, phi2, phi3> restricted to the space (gauge phi1 = 0).
inline Eigen::VectorXcd plane_wave(const TruncatedRingSpace& space, int total_charge, double phi2, double phi3) {
  if (space.boundary() == ChargeBoundary::Periodic) {
    for (double phi : {phi2, phi3}) {
      const double k = phi * space.modulus() / kTwoPi;
      if (std::abs(k - std::round(k)) > 1e-9) {
        throw ContractError("plane_wave: phase incompatible with the periodic charge modulus");
      }
    }
  }
  const int target = space.boundary() == ChargeBoundary::Periodic ? space.wrap(total_charge) : total_charge;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (space.sector(i) != target) continue;
    const auto n = space.charges(i);
    v(i) = std::polar(1.0, -phi2 * n[1] - phi3 * n[2]);
  }
  if (v.norm() == 0.0) throw ContractError("plane_wave: sector is empty in this space");
  return v / v.norm();
}

struct JumpResult {
  Eigen::VectorXcd state;
  double dropped_weight = 0.0;  // |psi|^2 pushed past a hard edge
};

/// L_k = exp(-i phi_k): lowers the charge on node k (1-based).
inline JumpResult jump_action(const TruncatedRingSpace& space, int node, const Eigen::VectorXcd& psi) {
  if (node < 1 || node > 3) throw ContractError("jump_action: node must be 1, 2 or 3");
  if (std::size_t(psi.size()) != space.dim()) throw ContractError("jump_action: state dimension mismatch");
  JumpResult r{Eigen::VectorXcd::Zero(space.dim()), 0.0};
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (const auto dst = space.shifted(i, node - 1, -1)) {
      r.state(*dst) += psi(i);
    } else {
      r.dropped_weight += std::norm(psi(i));
    }
  }
  return r;
}

/// Density operator over a TruncatedRingSpace.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols()) throw ContractError("DensityMatrix: matrix is not square");
  }

  static DensityMatrix pure(const Eigen::VectorXcd& psi) { return DensityMatrix(psi * psi.adjoint()); }

  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
  Eigen::MatrixXcd& matrix() noexcept { return rho_; }

  double trace() const { return rho_.trace().real(); }
  double purity() const { return (rho_.cwiseAbs2()).sum(); }
  double hermiticity_defect() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  void hermitize() { rho_ = 0.5 * (rho_ + rho_.adjoint()).eval(); }

  /// Hermitian to 1e-10, unit trace to 1e-10, eigenvalues >= -1e-8.
  void validate() const {
    if (hermiticity_defect() > 1e-10) throw ContractError("DensityMatrix: not Hermitian");
    if (std::abs(trace() - 1.0) > 1e-10) throw ContractError("DensityMatrix: trace is not 1");
    if (min_eigenvalue() < -1e-8) throw ContractError("DensityMatrix: not positive semidefinite");
  }

 private:
  Eigen::MatrixXcd rho_;
};

struct LindbladOptions {
  double gamma = 0.0;
  double t_final = 1.0;
  double dt = 0.01;
  double sample_interval = 0.0;   // 0: sample every step
  int positivity_every = 1;       // check the spectrum on every n-th sample; 0 disables
  double positivity_tol = 1e-8;
  /// Phases (phi2, phi3) for the sector-overlap diagnostic.
  std::optional<std::pair<double, double>> reference_phases;

  void validate() const {
    if (!(gamma >= 0.0)) throw ContractError("LindbladOptions: gamma must be >= 0");
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw ContractError("LindbladOptions: bad time grid");
    if (sample_interval < 0.0) throw ContractError("LindbladOptions: negative sample interval");
  }
};

struct LindbladSample {
  double t = 0.0;
  double trace = 0.0;
  double purity = 0.0;
  std::optional<double> min_eigenvalue;
  std::vector<double> population;        // per sector, ordered as LindbladResult::sectors
  std::vector<double> chirality;         // Tr(Pi_N chi rho) / p_N (0 when p_N ~ 0)
  std::vector<double> overlap_fraction;  // <N,phi2,phi3|rho|N,phi2,phi3> / p_N
};

struct LindbladResult {
  std::vector<int> sectors;
  std::vector<LindbladSample> samples;
  DensityMatrix final_state{Eigen::MatrixXcd::Zero(1, 1)};
};

/// Fixed-step RK4 on drho/dt = -i[H, rho] + gamma sum_k (L_k rho L_k^+ - {L_k^+ L_k, rho}/2),
/// Hermitized after every step.
inline LindbladResult lindblad_evolve(const TruncatedRingSpace& space, const DensityMatrix& rho0,
                                      const SparseOperator& H, const LindbladOptions& opt,
                                      const std::function<void(const LindbladSample&)>& on_sample = {}) {
  opt.validate();
  rho0.validate();
  const auto n = static_cast<Eigen::Index>(space.dim());
  if (rho0.matrix().rows() != n || H.rows() != n) throw ContractError("lindblad_evolve: dimension mismatch");

  // source[k][a]: state mapped onto a by L_k; kept[k][a]: L_k a stays in the space.
  std::array<std::vector<long>, 3> source;
  std::array<std::vector<double>, 3> kept;
  for (int k = 0; k < 3; ++k) {
    source[k].assign(n, -1);
    kept[k].assign(n, 0.0);
    for (Eigen::Index a = 0; a < n; ++a) {
      if (const auto dst = space.shifted(a, k, -1)) {
        source[k][*dst] = a;
        kept[k][a] = 1.0;
      }
    }
  }

  auto rhs = [&](const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
    const Eigen::MatrixXcd hr = H * rho;
    out = cplx(0.0, -1.0) * (hr - hr.adjoint());
    if (opt.gamma == 0.0) return;
    for (int k = 0; k < 3; ++k) {
      const auto& src = source[k];
      const auto& m = kept[k];
      for (Eigen::Index b = 0; b < n; ++b) {
        const long sb = src[b];
        for (Eigen::Index a = 0; a < n; ++a) {
          cplx v = -0.5 * (m[a] + m[b]) * rho(a, b);
          const long sa = src[a];
          if (sa >= 0 && sb >= 0) v += rho(sa, sb);
          out(a, b) += opt.gamma * v;
        }
      }
    }
  };

  const auto sectors = space.sectors();
  std::map<int, std::size_t> slot;
  for (std::size_t i = 0; i < sectors.size(); ++i) slot[sectors[i]] = i;
  const SparseOperator chi = chirality_operator(space);
  std::vector<Eigen::VectorXcd> refs;
  if (opt.reference_phases) {
    for (int q : sectors) {
      bool populated = false;
      for (Eigen::Index a = 0; a < n && !populated; ++a) populated = space.sector(a) == q;
      refs.push_back(populated ? plane_wave(space, q, opt.reference_phases->first, opt.reference_phases->second)
                               : Eigen::VectorXcd::Zero(n));
    }
  }

  LindbladResult result;
  result.sectors = sectors;
  int sample_count = 0;
  auto record = [&](double t, const DensityMatrix& rho) {
    LindbladSample s;
    s.t = t;
    s.trace = rho.trace();
    s.purity = rho.purity();
    if (opt.positivity_every > 0 && sample_count % opt.positivity_every == 0) {
      s.min_eigenvalue = rho.matrix().allFinite() ? rho.min_eigenvalue() : std::nan("");
      if (!(*s.min_eigenvalue >= -opt.positivity_tol)) {
        throw NumericalError("lindblad_evolve: positivity lost at t=" + std::to_string(t) + " (reduce dt)",
                             -*s.min_eigenvalue);
      }
    }
    ++sample_count;
    const std::size_t S = sectors.size();
    s.population.assign(S, 0.0);
    s.chirality.assign(S, 0.0);
    s.overlap_fraction.assign(S, 0.0);
    const Eigen::MatrixXcd chirho = chi * rho.matrix();
    for (Eigen::Index a = 0; a < n; ++a) {
      const std::size_t q = slot[space.sector(a)];
      s.population[q] += rho.matrix()(a, a).real();
      s.chirality[q] += chirho(a, a).real();
    }
    for (std::size_t q = 0; q < S; ++q) {
      const double p = s.population[q];
      s.chirality[q] = p > 1e-14 ? s.chirality[q] / p : 0.0;
      if (!refs.empty() && p > 1e-14) {
        s.overlap_fraction[q] = (refs[q].adjoint() * rho.matrix() * refs[q])(0, 0).real() / p;
      }
    }
    if (on_sample) on_sample(s);
    result.samples.push_back(std::move(s));
  };

  DensityMatrix rho = rho0;
  const long steps = std::lround(std::ceil(opt.t_final / opt.dt - 1e-9));
  const double h = steps > 0 ? opt.t_final / steps : 0.0;
  const long every = opt.sample_interval > 0.0 ? std::max(1L, std::lround(opt.sample_interval / h)) : 1;
  record(0.0, rho);
  Eigen::MatrixXcd k1, k2, k3, k4;
  for (long s = 1; s <= steps; ++s) {
    const Eigen::MatrixXcd& r = rho.matrix();
    rhs(r, k1);
    rhs(r + 0.5 * h * k1, k2);
    rhs(r + 0.5 * h * k2, k3);
    rhs(r + h * k3, k4);
    rho.matrix() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho.hermitize();
    if (s % every == 0 || s == steps) record(s * h, rho);
  }
  result.final_state = rho;
  return result;
}

}  // namespace jjring
