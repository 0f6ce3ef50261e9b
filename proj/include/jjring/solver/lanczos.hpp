#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <memory>
#include <cstdint>
#include <optional>
#include <string>

#include "jjring/error.hpp"
#include "jjring/linear_map.hpp"

namespace jjring {

struct EigenOptions {
  int count = 1;            // number of lowest eigenpairs
  double tol = 1e-10;       // residual target, relative to the norm estimate
  int basis_size = 60;      // Krylov subspace size before a thick restart
  int max_restarts = 400;
  std::uint64_t seed = 20240611;
  int norm_iterations = 20;
  /// Optional orthogonal projector; the search is confined to its range.
  std::optional<LinearMap> projector;
};

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending
  std::vector<CVector> eigenvectors;
  std::vector<double> residuals;    // |H x - lambda x|
  double norm_estimate = 0.0;
  int matvecs = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
};

/// Power-iteration estimate of the spectral norm.
inline double estimate_norm(const LinearMap& op, int iterations = 20, std::uint64_t seed = 1) {
  CVector v = random_vector(op.dim(), seed);
  scale(1.0 / norm(v), v);
  CVector w(op.dim());
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    op.apply(v, w);
    const double n = norm(w);
    est = std::max(est, n);
    if (n == 0.0) break;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / n;
  }
  return est;
}

namespace detail {

// Two passes of classical Gram-Schmidt; returns accumulated coefficients.
inline std::vector<cplx> orthogonalize(std::span<const CVector> basis, std::size_t count, CVector& w) {
  std::vector<cplx> coeff(count, cplx{});
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < count; ++i) {
      const cplx c = inner(basis[i], w);
      coeff[i] += c;
      axpy(-c, basis[i], w);
    }
  }
  return coeff;
}

// Fix the global phase so the largest-magnitude component is real positive.
inline void canonical_phase(CVector& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg]) * (1 + 1e-9)) arg = i;
  }
  const cplx ph = std::abs(v[arg]) > 0 ? std::conj(v[arg]) / std::abs(v[arg]) : cplx{1.0};
  scale(ph, v);
}

}  // namespace detail

namespace detail {

inline EigenResult thick_restart_lanczos(const LinearMap& H, const EigenOptions& opt) {
  if (!H.hermitian()) throw ContractError("lowest_eigenpairs: operator is not Hermitian");
  if (opt.count < 1) throw ContractError("lowest_eigenpairs: count must be >= 1");
  if (opt.projector && opt.projector->dim() != H.dim()) {
    throw ContractError("lowest_eigenpairs: projector dimension mismatch");
  }
  const std::size_t n = H.dim();
  const int k = opt.count;
  int m = static_cast<int>(std::min<std::size_t>(std::max(opt.basis_size, 2 * k + 4), n));
  if (k > m) throw ContractError("lowest_eigenpairs: count exceeds dimension");

  EigenResult res;
  res.seed = opt.seed;
  const double hnorm = std::max(estimate_norm(H, opt.norm_iterations, opt.seed ^ 0x9e3779b97f4a7c15ULL),
                                1e-300);
  res.norm_estimate = hnorm;
  const double target = opt.tol * hnorm;

  auto project = [&](CVector& v) {
    if (!opt.projector) return;
    CVector t(n);
    opt.projector->apply(v, t);
    v.swap(t);
  };

  std::uint64_t fresh_seed = opt.seed;
  // Returns false if no direction orthogonal to the current basis remains.
  auto fresh_direction = [&](std::vector<CVector>& V, std::size_t count, CVector& out) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      out = random_vector(n, fresh_seed++);
      project(out);
      const double before = norm(out);
      detail::orthogonalize(V, count, out);
      const double after = norm(out);
      if (before > 0 && after > 1e-8 * before) {
        scale(1.0 / after, out);
        return true;
      }
    }
    return false;
  };

  std::vector<CVector> V;
  V.reserve(m + 1);
  {
    CVector v0;
    if (!fresh_direction(V, 0, v0)) throw ContractError("lowest_eigenpairs: projector range is empty");
    V.push_back(std::move(v0));
  }

  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(m, m);
  int start = 0;
  double best = std::numeric_limits<double>::infinity();
  CVector w(n);

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    res.restarts = restart;
    int size = m;
    double beta_last = 0.0;
    for (int j = start; j < m; ++j) {
      H.apply(V[j], w);
      ++res.matvecs;
      project(w);
      const auto h = detail::orthogonalize(V, j + 1, w);
      for (int i = 0; i < j; ++i) {
        T(i, j) = h[i];
        T(j, i) = std::conj(h[i]);
      }
      T(j, j) = h[j].real();
      const double beta = norm(w);
      const bool breakdown = beta <= 1e-12 * hnorm;
      if (j + 1 == m) {
        beta_last = breakdown ? 0.0 : beta;
        if (!breakdown) scale(1.0 / beta, w);
        break;
      }
      if (static_cast<int>(V.size()) <= j + 1) V.emplace_back(n);
      if (breakdown) {
        if (!fresh_direction(V, j + 1, V[j + 1])) {
          size = j + 1;
          beta_last = 0.0;
          break;
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) V[j + 1][i] = w[i] / beta;
        T(j + 1, j) = beta;
        T(j, j + 1) = beta;
      }
    }
    if (size < k) throw NumericalError("lowest_eigenpairs: invariant subspace smaller than requested count");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T.topLeftCorner(size, size));
    const auto& theta = es.eigenvalues();
    const auto& Y = es.eigenvectors();

    bool estimates_ok = true;
    double worst_estimate = 0.0;
    for (int i = 0; i < k; ++i) {
      const double r = beta_last * std::abs(Y(size - 1, i));
      worst_estimate = std::max(worst_estimate, r);
      estimates_ok = estimates_ok && r <= target;
    }
    best = std::min(best, worst_estimate);

    const int keep = (estimates_ok || size < m) ? k : std::min(m - 2, k + (m - k) / 2);
    std::vector<CVector> ritz(keep, CVector(n, cplx{}));
    for (int i = 0; i < keep; ++i) {
      for (int j = 0; j < size; ++j) axpy(Y(j, i), V[j], ritz[i]);
    }

    if (estimates_ok || size < m) {
      bool all_ok = true;
      std::vector<double> resid(k);
      for (int i = 0; i < k; ++i) {
        CVector hx = H(ritz[i]);
        ++res.matvecs;
        project(hx);
        axpy(-theta(i), ritz[i], hx);
        resid[i] = norm(hx);
        all_ok = all_ok && resid[i] <= target;
      }
      const double worst = *std::max_element(resid.begin(), resid.end());
      best = std::min(best, worst);
      if (all_ok) {
        for (int i = 0; i < k; ++i) {
          detail::canonical_phase(ritz[i]);
          res.eigenvalues.push_back(theta(i));
          res.eigenvectors.push_back(std::move(ritz[i]));
          res.residuals.push_back(resid[i]);
        }
        return res;
      }
      if (size < m) {
        throw NumericalError("lowest_eigenpairs: exhausted subspace without convergence", best);
      }
      // Estimates passed but true residuals did not: restart with a wider
      // window than the converged set.
      const int wider = std::min(m - 2, k + (m - k) / 2);
      ritz.assign(wider, CVector(n, cplx{}));
      for (int i = 0; i < wider; ++i) {
        for (int j = 0; j < size; ++j) axpy(Y(j, i), V[j], ritz[i]);
      }
    }

    const int p = static_cast<int>(ritz.size());
    T.setZero();
    for (int i = 0; i < p; ++i) {
      V[i] = std::move(ritz[i]);
      T(i, i) = theta(i);
    }
    // Re-orthonormalize the kept block against rounding drift.
    for (int i = 0; i < p; ++i) {
      detail::orthogonalize(V, i, V[i]);
      scale(1.0 / norm(V[i]), V[i]);
    }
    CVector r;
    if (beta_last != 0.0) {
      r = w;
      detail::orthogonalize(V, p, r);
      scale(1.0 / norm(r), r);
    } else if (!fresh_direction(V, p, r)) {
      throw NumericalError("lowest_eigenpairs: stagnated", best);
    }
    V[p] = std::move(r);
    start = p;
  }
  throw NumericalError("lowest_eigenpairs: no convergence after " + std::to_string(opt.max_restarts) +
                           " restarts",
                       best);
}

}  // namespace detail

/// Lowest eigenpairs of a Hermitian operator by thick-restart Lanczos with
/// full reorthogonalization. Converged pairs satisfy
/// |H x - lambda x| <= tol * |H|_est; otherwise NumericalError carries the best
/// residual reached. For count > 1 the complement of the converged set is
/// probed again, since a single Krylov sequence sees only one vector of an
/// exactly degenerate eigenspace.
inline EigenResult lowest_eigenpairs(const LinearMap& H, const EigenOptions& opt = {}) {
  EigenResult res = detail::thick_restart_lanczos(H, opt);
  if (opt.count == 1) return res;
  const std::size_t n = H.dim();
  for (int round = 0; round < opt.count; ++round) {
    auto found = std::make_shared<const std::vector<CVector>>(res.eigenvectors);
    if (found->size() >= n) break;
    EigenOptions probe = opt;
    probe.count = 1;
    probe.seed = opt.seed + 0x9e3779b9ULL * std::uint64_t(round + 1);
    // Converged vectors are shifted above the spectrum rather than projected out.
    const double shift = 4.0 * res.norm_estimate + 1.0;
    const LinearMap deflated(n, H.basis(), true, [found, shift, &H](std::span<const cplx> in,
                                                                    std::span<cplx> out) {
      H.apply(in, out);
      for (const auto& v : *found) {
        const cplx c = shift * inner(v, in);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * v[i];
      }
    });
    EigenResult extra = detail::thick_restart_lanczos(deflated, probe);
    res.matvecs += extra.matvecs;
    CVector hx = H(extra.eigenvectors[0]);
    axpy(-extra.eigenvalues[0], extra.eigenvectors[0], hx);
    extra.residuals[0] = norm(hx);
    const double margin = opt.tol * res.norm_estimate;
    if (!(extra.eigenvalues[0] < res.eigenvalues.back() - margin)) break;
    const auto pos = std::upper_bound(res.eigenvalues.begin(), res.eigenvalues.end(), extra.eigenvalues[0]) -
                     res.eigenvalues.begin();
    res.eigenvalues.insert(res.eigenvalues.begin() + pos, extra.eigenvalues[0]);
    res.eigenvectors.insert(res.eigenvectors.begin() + pos, extra.eigenvectors[0]);
    res.residuals.insert(res.residuals.begin() + pos, extra.residuals[0]);
    res.eigenvalues.pop_back();
    res.eigenvectors.pop_back();
    res.residuals.pop_back();
  }
  return res;
}

}  // namespace jjring
