#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "jjring/opensys.hpp"

using namespace jjring;

namespace {
constexpr double kThird = 2.0 * kPi / 3.0;

struct Phases {
  double phi2, phi3;
};
const Phases kSpecial[] = {{0.0, 0.0}, {kThird, -kThird}, {-kThird, kThird}};

RingParams ring(double ej, double ec, double en) {
  RingParams p;
  p.josephson = ej;
  p.charging = ec;
  p.node = en;
  p.flux = 0.0;
  return p;
}

// Jump matrices built straight from charge tuples.
Eigen::MatrixXcd jump_matrix(const TruncatedRingSpace& s, int node) {
  const int n = s.cutoff(), m = s.modulus();
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b)
      for (int c = -n; c <= n; ++c) {
        std::array<int, 3> from{a, b, c}, to = from;
        to[node] -= 1;
        if (to[node] < -n) {
          if (s.boundary() == ChargeBoundary::HardCutoff) continue;
          to[node] += m;
        }
        auto flat = [&](const std::array<int, 3>& q) { return ((q[0] + n) * m + (q[1] + n)) * m + (q[2] + n); };
        J(flat(to), flat(from)) = 1.0;
      }
  return J;
}

// Column-stacked Liouvillian: vec(A rho B) = (B^T kron A) vec(rho).
Eigen::MatrixXcd liouvillian(const TruncatedRingSpace& s, const Eigen::MatrixXcd& H, double gamma) {
  const Eigen::Index d = s.dim();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  auto kron = [](const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
  };
  Eigen::MatrixXcd Lv = cplx(0, -1) * (kron(I, H) - kron(H.transpose(), I));
  for (int k = 0; k < 3; ++k) {
    const Eigen::MatrixXcd J = jump_matrix(s, k);
    const Eigen::MatrixXcd JdJ = J.adjoint() * J;
    Lv += gamma * (kron(J.conjugate(), J) - 0.5 * kron(I, JdJ) - 0.5 * kron(JdJ.transpose(), I));
  }
  return Lv;
}

Eigen::MatrixXcd oracle_state(const TruncatedRingSpace& s, const Eigen::MatrixXcd& H, double gamma,
                              const Eigen::MatrixXcd& rho0, double t) {
  const Eigen::Index d = s.dim();
  const Eigen::MatrixXcd prop = (liouvillian(s, H, gamma) * t).exp();
  Eigen::VectorXcd v = prop * Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
  return Eigen::Map<Eigen::MatrixXcd>(v.data(), d, d);
}

LindbladOptions options(double gamma, double t, double dt) {
  LindbladOptions o;
  o.gamma = gamma;
  o.t_final = t;
  o.dt = dt;
  return o;
}
}  // namespace

TEST(TruncatedSpace, EnumerationRoundTrip) {
  const TruncatedRingSpace s(2);
  EXPECT_EQ(s.dim(), 125u);
  for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_EQ(s.index(s.charges(i)), i);
  EXPECT_EQ(s.charges(0), (std::array<int, 3>{-2, -2, -2}));
  EXPECT_EQ(s.charges(1), (std::array<int, 3>{-2, -2, -1}));
  EXPECT_THROW(s.index({3, 0, 0}), ContractError);
  EXPECT_THROW(TruncatedRingSpace(8), ContractError);
  EXPECT_THROW(TruncatedRingSpace(0), ContractError);
}

TEST(TruncatedSpace, PeriodicSectorsWrap) {
  const TruncatedRingSpace s(4, ChargeBoundary::Periodic);
  EXPECT_EQ(s.sector(s.index({4, 4, 0})), -1);
  EXPECT_EQ(s.sector(s.index({-4, -1, 0})), 4);
  EXPECT_EQ(s.sectors().size(), 9u);
  EXPECT_EQ(*s.shifted(s.index({-4, 0, 0}), 0, -1), s.index({4, 0, 0}));
  const TruncatedRingSpace hard(4);
  EXPECT_FALSE(hard.shifted(hard.index({-4, 0, 0}), 0, -1).has_value());
}

TEST(Jump, PeriodicPhaseRelationsExact) {
  const TruncatedRingSpace s(4, ChargeBoundary::Periodic);
  for (const auto& ph : kSpecial) {
    for (int N : {1, 0, -2}) {
      const auto psi = plane_wave(s, N, ph.phi2, ph.phi3);
      const auto lower = plane_wave(s, N - 1, ph.phi2, ph.phi3);
      const double phase[3] = {0.0, ph.phi2, ph.phi3};
      for (int k = 1; k <= 3; ++k) {
        const auto r = jump_action(s, k, psi);
        EXPECT_EQ(r.dropped_weight, 0.0);
        const Eigen::VectorXcd expected = std::polar(1.0, -phase[k - 1]) * lower;
        EXPECT_LT((r.state - expected).norm(), 1e-12) << "N=" << N << " k=" << k;
      }
    }
  }
}

TEST(Jump, HardCutoffAccountsDroppedWeight) {
  const TruncatedRingSpace s(7);
  for (const auto& ph : kSpecial) {
    const auto psi = plane_wave(s, 1, ph.phi2, ph.phi3);
    for (int k = 1; k <= 3; ++k) {
      const auto r = jump_action(s, k, psi);
      EXPECT_GT(r.dropped_weight, 0.0);
      EXPECT_NEAR(r.state.squaredNorm() + r.dropped_weight, 1.0, 1e-12);
      // Interior amplitudes keep the phase relation; only boundary support is lost.
      const auto lower = plane_wave(s, 0, ph.phi2, ph.phi3);
      const double phase[3] = {0.0, ph.phi2, ph.phi3};
      const cplx ov = lower.dot(r.state);
      EXPECT_NEAR(std::arg(ov * std::polar(1.0, phase[k - 1])), 0.0, 1e-12);
      EXPECT_LT(std::abs(ov), 1.0 - 1e-3);
    }
  }
  EXPECT_THROW(jump_action(s, 0, plane_wave(s, 1, 0, 0)), ContractError);
}

TEST(OpenHamiltonian, HermitianAndMatchesDenseJumps) {
  const TruncatedRingSpace s(2);
  const auto p = ring(1.3, 0.4, 2.0);
  const Eigen::MatrixXcd H = Eigen::MatrixXcd(ring_hamiltonian(s, p));
  EXPECT_LT((H - H.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  // Junction 1 term e^{i(phi2 - phi1)} = L2^+ L1 on interior states.
  const Eigen::MatrixXcd hop = jump_matrix(s, 1).adjoint() * jump_matrix(s, 0);
  for (Eigen::Index j = 0; j < H.cols(); ++j)
    for (Eigen::Index i = 0; i < H.rows(); ++i)
      if (std::abs(hop(i, j)) > 0) EXPECT_NEAR(std::abs(H(i, j) + 0.5 * 1.3), 0.0, 1e-15);
}

TEST(OpenHamiltonian, PlaneWavesAreEigenstatesWithoutCharging) {
  const TruncatedRingSpace s(4, ChargeBoundary::Periodic);
  auto p = ring(1.0, 0.0, 0.7);
  p.flux = 0.9;
  const SparseOperator H = ring_hamiltonian(s, p);
  const double a = p.flux / 3.0;
  for (const auto& ph : kSpecial) {
    for (int N : {1, 2, -3}) {
      const auto psi = plane_wave(s, N, ph.phi2, ph.phi3);
      const double energy = 0.7 * N * N - (std::cos(ph.phi2 - a) + std::cos(ph.phi3 - ph.phi2 - a) +
                                           std::cos(-ph.phi3 - a));
      EXPECT_LT((H * psi - energy * psi).norm(), 1e-12);
    }
  }
}

TEST(OpenChirality, SpecialStateEigenvalues) {
  const TruncatedRingSpace s(4, ChargeBoundary::Periodic);
  const SparseOperator chi = chirality_operator(s);
  for (int N : {0, 1, 2}) {
    const double v = std::sin(2 * kPi * N / 3);
    const auto sym = plane_wave(s, N, 0, 0);
    const auto plus = plane_wave(s, N, kThird, -kThird);
    const auto minus = plane_wave(s, N, -kThird, kThird);
    EXPECT_LT((chi * sym).norm(), 1e-12);
    EXPECT_LT((chi * plus + v * plus).norm(), 1e-12);
    EXPECT_LT((chi * minus - v * minus).norm(), 1e-12);
  }
}

TEST(OpenChirality, PlaneWaveRejectsOffLatticePhases) {
  const TruncatedRingSpace s(2, ChargeBoundary::Periodic);
  EXPECT_THROW(plane_wave(s, 0, kThird, 0), ContractError);
}

TEST(Density, Validation) {
  EXPECT_NO_THROW(DensityMatrix::pure(Eigen::VectorXcd::Unit(3, 1)).validate());
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  EXPECT_THROW(DensityMatrix(bad).validate(), ContractError);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix(bad).validate(), ContractError);
  bad = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  bad(0, 1) = cplx(0, 0.1);
  EXPECT_THROW(DensityMatrix(bad).validate(), ContractError);
}

TEST(Lindblad, UnitaryLimitKeepsPurity) {
  const TruncatedRingSpace s(2);
  const auto H = ring_hamiltonian(s, ring(1.0, 0.3, 0.2));
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 1, kThird, -kThird));
  const auto res = lindblad_evolve(s, rho0, H, options(0.0, 5.0, 0.01));
  for (const auto& x : res.samples) {
    EXPECT_NEAR(x.purity, 1.0, 1e-8);
    EXPECT_NEAR(x.trace, 1.0, 1e-10);
  }
}

TEST(Lindblad, MatchesLiouvillianExponential) {
  const TruncatedRingSpace s(1);
  auto p = ring(1.0, 0.6, 0.8);
  p.flux = 0.4;
  const auto H = ring_hamiltonian(s, p);
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 0, kThird, -kThird));
  const double t = 2.0, gamma = 0.3;
  const Eigen::MatrixXcd exact = oracle_state(s, Eigen::MatrixXcd(H), gamma, rho0.matrix(), t);
  const auto fine = lindblad_evolve(s, rho0, H, options(gamma, t, 0.005));
  EXPECT_LT((fine.final_state.matrix() - exact).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(fine.samples.back().trace, 1.0, 1e-12);
}

TEST(Lindblad, HalvingStepShowsFourthOrder) {
  const TruncatedRingSpace s(1);
  const auto H = ring_hamiltonian(s, ring(1.0, 0.6, 0.8));
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 1, -kThird, kThird));
  const double t = 2.0, gamma = 0.5;
  const Eigen::MatrixXcd exact = oracle_state(s, Eigen::MatrixXcd(H), gamma, rho0.matrix(), t);
  auto err = [&](double dt) {
    auto opt = options(gamma, t, dt);
    opt.positivity_every = 0;
    return (lindblad_evolve(s, rho0, H, opt).final_state.matrix() - exact).norm();
  };
  const double ratio = err(0.1) / err(0.05);
  EXPECT_GE(ratio, 4.0);
  EXPECT_NEAR(ratio, 16.0, 3.0);
}

TEST(Lindblad, HardCutoffPreservesTrace) {
  const TruncatedRingSpace s(2);
  const auto H = ring_hamiltonian(s, ring(1.0, 0.3, 0.2));
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 2, kThird, -kThird));
  const auto res = lindblad_evolve(s, rho0, H, options(1.0, 4.0, 0.01));
  for (const auto& x : res.samples) {
    EXPECT_NEAR(x.trace, 1.0, 1e-8 * std::max(1.0, x.t));
    ASSERT_TRUE(x.min_eigenvalue.has_value());
    EXPECT_GE(*x.min_eigenvalue, -1e-8);
  }
  EXPECT_LT(res.samples.back().purity, 0.9);
}

TEST(Lindblad, DecayKeepsSectorPhasesAndReachesMixture) {
  const TruncatedRingSpace s(1, ChargeBoundary::Periodic);
  const auto H = ring_hamiltonian(s, ring(1.0, 0.0, 0.5));
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 1, kThird, -kThird));
  auto opt = options(1.0, 8.0, 0.02);
  opt.reference_phases = {kThird, -kThird};
  opt.sample_interval = 0.2;
  const auto res = lindblad_evolve(s, rho0, H, opt);
  std::vector<int> sign(res.sectors.size(), 0);
  for (const auto& x : res.samples) {
    EXPECT_NEAR(x.trace, 1.0, 1e-10);
    for (std::size_t q = 0; q < res.sectors.size(); ++q) {
      if (x.population[q] < 1e-12) continue;
      EXPECT_GE(x.overlap_fraction[q], 1.0 - 1e-6);
      const int sg = x.chirality[q] > 1e-9 ? 1 : (x.chirality[q] < -1e-9 ? -1 : 0);
      if (sign[q] == 0) sign[q] = sg;
      EXPECT_EQ(sg, sign[q]) << "sector " << res.sectors[q];
    }
  }
  const Eigen::MatrixXcd& rho = res.final_state.matrix();
  for (int k = 0; k < 3; ++k) {
    const Eigen::MatrixXcd J = jump_matrix(s, k);
    EXPECT_LT((J * rho - rho * J).cwiseAbs().maxCoeff(), 1e-6);
  }
  for (double p : res.samples.back().population) EXPECT_NEAR(p, 1.0 / 3.0, 1e-6);
}

TEST(Lindblad, OversizedStepReportsPositivityLoss) {
  const TruncatedRingSpace s(1);
  const auto H = ring_hamiltonian(s, ring(1.0, 2.0, 5.0));
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 0, kThird, -kThird));
  EXPECT_THROW(lindblad_evolve(s, rho0, H, options(2.0, 20.0, 1.0)), NumericalError);
}

TEST(Lindblad, RejectsInvalidInput) {
  const TruncatedRingSpace s(1);
  const auto H = ring_hamiltonian(s, ring(1.0, 0.0, 1.0));
  const auto rho0 = DensityMatrix::pure(plane_wave(s, 0, 0, 0));
  EXPECT_THROW(lindblad_evolve(s, rho0, H, options(-1.0, 1.0, 0.1)), ContractError);
  EXPECT_THROW(lindblad_evolve(s, DensityMatrix(Eigen::MatrixXcd::Identity(27, 27)), H, options(0.1, 1.0, 0.1)),
               ContractError);
}
