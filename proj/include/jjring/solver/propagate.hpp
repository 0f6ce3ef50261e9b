#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "jjring/error.hpp"
#include "jjring/linear_map.hpp"
#include "jjring/solver/dense.hpp"
#include "jjring/solver/lanczos.hpp"

namespace jjring {

enum class PropagatorMethod { Krylov, Chebyshev, DenseOracle };

struct PropagatorConfig {
  PropagatorMethod method = PropagatorMethod::Krylov;
  double dt = 0.0;       // largest internal step
  int krylov_dim = 40;
  double tol = 1e-12;    // per-step error target for a unit-norm state
  /// Chebyshev only: [E_min, E_max] enclosing the spectrum. Estimated by
  /// power iteration when absent.
  std::optional<std::pair<double, double>> spectral_bounds;

  void validate() const {
    if (!(dt > 0.0)) throw ContractError("PropagatorConfig: dt must be positive");
    if (krylov_dim < 2) throw ContractError("PropagatorConfig: krylov_dim must be >= 2");
    if (!(tol > 0.0)) throw ContractError("PropagatorConfig: tol must be positive");
    if (spectral_bounds && !(spectral_bounds->first < spectral_bounds->second)) {
      throw ContractError("PropagatorConfig: empty spectral interval");
    }
  }
};

struct PropagationStats {
  int steps = 0;
  int rejected = 0;
  long matvecs = 0;
  double max_norm_error = 0.0;
};

using Observer = std::function<void(double t, std::span<const cplx> psi)>;

/// 0, dt, 2 dt, ... up to and including t_final (to rounding).
inline std::vector<double> uniform_times(double t_final, double dt) {
  if (!(dt > 0.0) || t_final < 0.0) throw ContractError("uniform_times: bad arguments");
  const auto n = static_cast<long>(std::floor(t_final / dt + 1e-9));
  std::vector<double> t(n + 1);
  for (long i = 0; i <= n; ++i) t[i] = i * dt;
  return t;
}

namespace detail {

class KrylovStepper {
 public:
  KrylovStepper(const LinearMap& H, const PropagatorConfig& cfg) : H_(H), cfg_(cfg) {}

  // Advances psi by at most h; returns the step actually taken.
  double step(CVector& psi, double h, PropagationStats& st) {
    const std::size_t n = psi.size();
    const int m = static_cast<int>(std::min<std::size_t>(cfg_.krylov_dim, n));
    const double beta0 = norm(psi);
    if (V_.size() < std::size_t(m) || V_[0].size() != n) V_.assign(m, CVector(n));
    for (std::size_t i = 0; i < n; ++i) V_[0][i] = psi[i] / beta0;
    std::vector<double> alpha, beta;
    w_.resize(n);
    CVector& w = w_;
    int dim = m;
    double beta_tail = 0.0;
    for (int j = 0; j < m; ++j) {
      H_.apply(V_[j], w);
      ++st.matvecs;
      // Short recurrence with a second local pass; the step is short enough
      // that global loss of orthogonality stays below the error target.
      const std::size_t first = j > 0 ? j - 1 : 0;
      cplx a{};
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = first; i <= std::size_t(j); ++i) {
          const cplx c = inner(V_[i], w);
          if (i == std::size_t(j)) a += c;
          axpy(-c, V_[i], w);
        }
      }
      alpha.push_back(a.real());
      const double b = norm(w);
      if (b <= 1e-14 * (std::abs(alpha.back()) + 1.0)) {
        dim = j + 1;
        beta_tail = 0.0;
        break;
      }
      if (j + 1 == m) {
        beta_tail = b;
        break;
      }
      beta.push_back(b);
      for (std::size_t i = 0; i < n; ++i) V_[j + 1][i] = w[i] / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) T(j, j) = alpha[j];
    for (int j = 0; j + 1 < dim; ++j) T(j, j + 1) = T(j + 1, j) = beta[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const auto& lam = es.eigenvalues();
    const auto& S = es.eigenvectors();

    auto coeffs = [&](double tau) {
      Eigen::VectorXcd y(dim);
      for (int r = 0; r < dim; ++r) {
        cplx acc{};
        for (int i = 0; i < dim; ++i) acc += S(r, i) * std::polar(1.0, -lam(i) * tau) * S(0, i);
        y(r) = acc;
      }
      return y;
    };

    double tau = h;
    Eigen::VectorXcd y = coeffs(tau);
    while (beta_tail * std::abs(y(dim - 1)) > cfg_.tol) {
      tau *= 0.5;
      ++st.rejected;
      if (tau < 1e-14 * h) throw NumericalError("Krylov propagation: step size underflow");
      y = coeffs(tau);
    }
    std::fill(psi.begin(), psi.end(), cplx{});
    for (int j = 0; j < dim; ++j) axpy(beta0 * y(j), V_[j], psi);
    ++st.steps;
    return tau;
  }

 private:
  const LinearMap& H_;
  const PropagatorConfig& cfg_;
  std::vector<CVector> V_;
  CVector w_;
};

class ChebyshevStepper {
 public:
  ChebyshevStepper(const LinearMap& H, const PropagatorConfig& cfg) : H_(H), cfg_(cfg) {
    double lo, hi;
    if (cfg.spectral_bounds) {
      std::tie(lo, hi) = *cfg.spectral_bounds;
    } else {
      const double nrm = 1.05 * estimate_norm(H, 40);
      lo = -nrm;
      hi = nrm;
    }
    center_ = 0.5 * (lo + hi);
    radius_ = 0.5 * (hi - lo) * 1.01;
  }

  double step(CVector& psi, double h, PropagationStats& st) {
    const std::size_t n = psi.size();
    const double x = radius_ * h;
    // Expansion order: past the Bessel turning point and below tolerance twice.
    std::vector<double> J;
    for (int k = 0;; ++k) {
      J.push_back(std::cyl_bessel_j(static_cast<double>(k), x));
      if (k > x + 2 && std::abs(J[k]) < 1e-3 * cfg_.tol && std::abs(J[k - 1]) < 1e-3 * cfg_.tol) break;
      if (k > 100000) throw NumericalError("Chebyshev propagation: expansion order overflow");
    }
    auto apply_scaled = [&](const CVector& in, CVector& out) {
      H_.apply(in, out);
      ++st.matvecs;
      for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] - center_ * in[i]) / radius_;
    };
    CVector prev = psi, cur(n), next(n);
    apply_scaled(prev, cur);
    CVector acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = J[0] * prev[i] + 2.0 * (-kI) * J[1] * cur[i];
    cplx phase = -kI;
    for (std::size_t k = 2; k < J.size(); ++k) {
      apply_scaled(cur, next);
      for (std::size_t i = 0; i < n; ++i) next[i] = 2.0 * next[i] - prev[i];
      phase *= -kI;
      axpy(2.0 * phase * J[k], next, acc);
      std::swap(prev, cur);
      std::swap(cur, next);
    }
    const cplx global = std::polar(1.0, -center_ * h);
    for (std::size_t i = 0; i < n; ++i) psi[i] = global * acc[i];
    ++st.steps;
    return h;
  }

 private:
  const LinearMap& H_;
  const PropagatorConfig& cfg_;
  double center_ = 0.0, radius_ = 1.0;
};

}  // namespace detail

/// Evolves psi under exp(-i H t) and calls `observer` at each requested time.
/// Times must be ascending and start at or after 0; psi must be normalized.
inline PropagationStats propagate(const LinearMap& H, CVector& psi, std::span<const double> times,
                                  const PropagatorConfig& cfg, const Observer& observer = {}) {
  cfg.validate();
  if (!H.hermitian()) throw ContractError("propagate: Hamiltonian is not Hermitian");
  if (psi.size() != H.dim()) throw ContractError("propagate: state dimension mismatch");
  if (std::abs(norm(psi) - 1.0) > 1e-10) throw ContractError("propagate: initial state is not normalized");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
      throw ContractError("propagate: sample times must be ascending and non-negative");
    }
  }

  PropagationStats st;
  auto check_norm = [&](double t) {
    const double err = std::abs(norm(psi) - 1.0);
    st.max_norm_error = std::max(st.max_norm_error, err);
    if (err > 1e-10) {
      throw NumericalError("propagate: norm drift at t=" + std::to_string(t), err);
    }
  };

  if (cfg.method == PropagatorMethod::DenseOracle) {
    const DenseSpectrum sp = dense_spectrum(H);
    const CVector psi0 = psi;
    for (double t : times) {
      psi = dense_evolve(sp, psi0, t);
      check_norm(t);
      if (observer) observer(t, psi);
    }
    return st;
  }

  std::optional<detail::KrylovStepper> krylov;
  std::optional<detail::ChebyshevStepper> cheb;
  if (cfg.method == PropagatorMethod::Krylov) {
    krylov.emplace(H, cfg);
  } else {
    cheb.emplace(H, cfg);
  }

  double t = 0.0;
  double suggested = cfg.dt;
  for (double target : times) {
    while (target - t > 1e-13 * std::max(1.0, target)) {
      const double h = std::min({suggested, cfg.dt, target - t});
      const double taken = krylov ? krylov->step(psi, h, st) : cheb->step(psi, h, st);
      t += taken;
      suggested = taken < h ? taken : std::min(cfg.dt, 2.0 * taken);
    }
    t = target;
    check_norm(t);
    if (observer) observer(t, psi);
  }
  return st;
}

/// 1 - |<psi_dt | psi_dt/2>| after evolving to t_final with the configured
/// step and with half of it.
inline double step_doubling_infidelity(const LinearMap& H, const CVector& psi0, double t_final,
                                       PropagatorConfig cfg) {
  const std::vector<double> times{t_final};
  CVector a = psi0, b = psi0;
  propagate(H, a, times, cfg);
  cfg.dt *= 0.5;
  propagate(H, b, times, cfg);
  return 1.0 - std::abs(inner(a, b));
}

}  // namespace jjring
