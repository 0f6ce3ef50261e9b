#pragma once

#include <Eigen/Dense>

#include "jjring/linear_map.hpp"

namespace jjring {

/// Full diagonalization of a small Hermitian operator.
struct DenseSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
};

inline DenseSpectrum dense_spectrum(const LinearMap& H, std::size_t max_dim = 4096) {
  if (!H.hermitian()) throw ContractError("dense_spectrum: operator is not Hermitian");
  Eigen::MatrixXcd m = to_dense(H, max_dim);
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// exp(-i H t) psi via the eigendecomposition.
inline CVector dense_evolve(const DenseSpectrum& sp, std::span<const cplx> psi, double t) {
  const auto n = sp.eigenvalues.size();
  Eigen::Map<const Eigen::VectorXcd> v(psi.data(), n);
  Eigen::VectorXcd c = sp.eigenvectors.adjoint() * v;
  for (Eigen::Index i = 0; i < n; ++i) c(i) *= std::polar(1.0, -sp.eigenvalues(i) * t);
  Eigen::VectorXcd out = sp.eigenvectors * c;
  return CVector(out.data(), out.data() + n);
}

}  // namespace jjring
