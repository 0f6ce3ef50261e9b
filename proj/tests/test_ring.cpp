#include <gtest/gtest.h>

#include "jjring/ring.hpp"
#include "oracles.hpp"

using namespace jjring;

namespace {
RingParams params(double EJ, double EC, double EN, int N, double phie) {
  RingParams p;
  p.josephson = EJ;
  p.charging = EC;
  p.node = EN;
  p.total_charge = N;
  p.flux = phie;
  return p;
}
}  // namespace

TEST(RingParams, Validation) {
  EXPECT_THROW(params(0, 1, 0, 0, 0).validate(), ContractError);
  EXPECT_THROW(params(1, -1, 0, 0, 0).validate(), ContractError);
  EXPECT_NO_THROW(params(1, 0, 0, 0, 0).validate());
  EXPECT_THROW(params(10, 0.1, 50, 1, 0).validate(true), ContractError);
  EXPECT_NO_THROW(params(10, 0.1, 100, 1, 0).validate(true));
  auto p = params(1, 0.1, 0, 0, 0);
  p.disorder = {-2, 0, 0};
  EXPECT_THROW(p.validate(), ContractError);
}

TEST(RingParams, HarmonicScales) {
  const auto h = harmonic_params(params(10, 0.1, 0, 1, kTwoPi));
  EXPECT_NEAR(h.omega, std::sqrt(12.0), 1e-14);
  const double expected = (4 * kPi * kPi / 3) * std::sqrt(1.0 / 300.0);
  EXPECT_NEAR(h.mean_excitations(), expected, 1e-12);
  EXPECT_NEAR(h.mean_excitations(), 0.760, 1e-3);
}

TEST(Hamiltonian, MatchesDenseAssembly) {
  const int L = 6;
  const PhaseGrid g(L);
  for (double phie : {0.0, 1.3, kTwoPi}) {
    auto p = params(10, 1, 3, 1, phie);
    const Eigen::MatrixXcd ours = to_dense(build_hamiltonian(p, g));
    const Eigen::MatrixXcd ref = oracle::ring_hamiltonian(L, 10, 1, 3, 1, phie);
    EXPECT_LE((ours - ref).cwiseAbs().maxCoeff(), 1e-12) << "phi_e=" << phie;
    EXPECT_LE((ours - ours.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Hamiltonian, DisorderedMatchesDenseAssembly) {
  const int L = 12;
  const PhaseGrid g(L);
  auto p = params(10, 1, 0, 2, 0.7);
  p.disorder = {1.0, -0.5, 0.2};
  const double dis[3] = {1.0, -0.5, 0.2};
  const Eigen::MatrixXcd ours = to_dense(build_hamiltonian(p, g));
  const Eigen::MatrixXcd ref = oracle::ring_hamiltonian(L, 10, 1, 0, 2, 0.7, dis);
  EXPECT_LE((ours - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hamiltonian, HermiticityOnLargeGrid) {
  const PhaseGrid g(60);
  EXPECT_LT(hermiticity_defect(build_hamiltonian(params(10, 0.1, 1, 1, 2.0), g)), 1e-10);
  EXPECT_LT(hermiticity_defect(build_harmonic_hamiltonian(params(10, 0.1, 1, 1, kTwoPi), g)), 1e-10);
}

TEST(Hamiltonian, ZeroChargingGroundIsPotentialMinimum) {
  const PhaseGrid g(24);
  auto p = params(10, 0, 2, 1, 0);
  const auto r = ring_eigenpairs(p, g);
  EXPECT_NEAR(r.eigenvalues[0], 2.0 - 30.0, 1e-8);
}

TEST(Hamiltonian, SpectrumIsFluxPeriodic) {
  const PhaseGrid g(24);
  EigenOptions opt;
  opt.count = 3;
  const auto a = ring_eigenpairs(params(10, 1, 0, 1, 0.7), g, opt);
  const auto b = ring_eigenpairs(params(10, 1, 0, 1, 0.7 + kTwoPi), g, opt);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 10 * opt.tol * a.norm_estimate);
}

TEST(Hamiltonian, SpectrumIsFluxReflectionSymmetric) {
  const PhaseGrid g(24);
  EigenOptions opt;
  opt.count = 3;
  const auto a = ring_eigenpairs(params(10, 1, 0, 0, 1.1), g, opt);
  const auto b = ring_eigenpairs(params(10, 1, 0, 0, -1.1), g, opt);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 1e-8);
}

TEST(Hamiltonian, ThirdShiftMapsFluxByTwoPi) {
  const PhaseGrid g(12);
  const auto p = params(10, 1, 0, 1, 0.4);
  const Eigen::MatrixXcd D = to_dense(charge_shift_operator(g, Axis::Minus, 4));
  const Eigen::MatrixXcd h0 = to_dense(build_hamiltonian(p, g));
  const Eigen::MatrixXcd h1 = to_dense(build_hamiltonian(p.with_flux(0.4 + kTwoPi), g));
  EXPECT_LE((D * h0 * D.adjoint() - h1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HarmonicHamiltonian, MatchesDenseAssembly) {
  const int L = 12;
  const PhaseGrid g(L);
  const auto p = params(10, 1, 0, 1, kTwoPi);
  const Eigen::MatrixXcd F = oracle::dft_matrix(L);
  Eigen::VectorXcd K(L * L), V(L * L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double np = oracle::idx(L, i), nm = oracle::idx(L, j);
      K(i * L + j) = (1.0 / 3) + 0.5 * (3 * std::pow(np - 2.0 / 3, 2) + nm * nm);
      const double pp = 2 * oracle::pi * np / L;
      double pm = 2 * oracle::pi * nm / L - kTwoPi / 3;
      while (pm > oracle::pi) pm -= 2 * oracle::pi;
      while (pm <= -oracle::pi) pm += 2 * oracle::pi;
      V(i * L + j) = 10 * (pp * pp + 3 * pm * pm);
    }
  Eigen::MatrixXcd ref = F * K.asDiagonal() * F.adjoint();
  ref.diagonal() += V;
  const Eigen::MatrixXcd ours = to_dense(build_harmonic_hamiltonian(p, g));
  EXPECT_LE((ours - ref).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(HarmonicHamiltonian, ZeroPointEnergy) {
  // Both quadratic modes have frequency sqrt(6 E_J E_C) for this kinetic term.
  const PhaseGrid g(48);
  const auto p = params(10, 0.1, 0, 0, 0);
  const auto r = lowest_eigenpairs(build_harmonic_hamiltonian(p, g));
  EXPECT_NEAR(r.eigenvalues[0], std::sqrt(6 * 10 * 0.1), 0.01 * std::sqrt(6.0));
}

TEST(HarmonicHamiltonian, AgreesWithFullDeepInTransmonRegime) {
  const PhaseGrid g(72);
  const auto p = params(10, 1e-3, 0, 0, 0);
  const double full = ring_eigenpairs(p, g).eigenvalues[0] + 30.0;
  const double harm = lowest_eigenpairs(build_harmonic_hamiltonian(p, g)).eigenvalues[0];
  EXPECT_NEAR(full, harm, 0.01 * harm);
}

TEST(ChiralCurrent, PointValuesAndOddness) {
  EXPECT_NEAR(chiral_current(0, kTwoPi / 3, 0), 1.5 * std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(chiral_current(0, 0, 0), 0.0, 1e-15);
  const PhaseGrid g(12);
  const auto I = chiral_current_map(g, 0.0);
  EXPECT_TRUE(I.hermitian());
  const CVector v = random_vector(g.dim(), 2);
  const CVector a = I(parity_map(g)(v));
  const CVector b = parity_map(g)(I(v));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(std::abs(a[i] + b[i]), 0.0, 1e-13);
}

class ChiralityAlgebra : public ::testing::TestWithParam<int> {};

TEST_P(ChiralityAlgebra, EigenvaluesOnSpecialStates) {
  const int N = GetParam();
  const PhaseGrid g(24);
  const auto P = permutation_p123(g, N);
  const auto chi = chirality_chi(g, N);
  const auto s0 = special_state(g, SpecialState::Symmetric);
  const auto sp = special_state(g, SpecialState::ChiralPlus);
  const auto sm = special_state(g, SpecialState::ChiralMinus);
  const double s = std::sin(kTwoPi * N / 3);
  auto check_eigen = [](const LinearMap& op, const WaveFunction& wf, cplx lambda) {
    const auto out = apply(op, wf);
    for (std::size_t i = 0; i < out.amplitudes().size(); ++i) {
      EXPECT_NEAR(std::abs(out.amplitudes()[i] - lambda * wf.amplitudes()[i]), 0.0, 1e-12);
    }
  };
  check_eigen(chi, s0, 0.0);
  check_eigen(chi, sp, -s);
  check_eigen(chi, sm, s);
  check_eigen(P, s0, 1.0);
  check_eigen(P, sp, std::polar(1.0, -kTwoPi * N / 3));
  check_eigen(P, sm, std::polar(1.0, kTwoPi * N / 3));
}

TEST_P(ChiralityAlgebra, OperatorIdentities) {
  const int N = GetParam();
  const PhaseGrid g(12);
  const auto P = permutation_p123(g, N);
  const auto chi = chirality_chi(g, N);
  const auto D = shift_operator(g, Axis::Minus, g.size() / 3);
  const CVector v = random_vector(g.dim(), 11);
  EXPECT_LT(hermiticity_defect(chi), 1e-12);
  EXPECT_NEAR(norm(P(v)), norm(v), 1e-12);
  // [chi, P] = 0
  EXPECT_LE(max_abs_diff(chi(P(v)), P(chi(v))), 1e-12);
  // P D = e^{-2 pi i N/3} D P
  CVector pd = P(D(v));
  CVector dp = D(P(v));
  scale(std::polar(1.0, -kTwoPi * N / 3), dp);
  EXPECT_LE(max_abs_diff(pd, dp), 1e-12);
  // parity chi parity = -chi
  const auto R = parity_map(g);
  CVector rcr = R(chi(R(v)));
  CVector mc = chi(v);
  for (auto& z : mc) z = -z;
  EXPECT_LE(max_abs_diff(rcr, mc), 1e-12);
  // chi = (P - P^dagger)/2i
  const Eigen::MatrixXcd Pd = to_dense(P);
  const Eigen::MatrixXcd chid = to_dense(chi);
  EXPECT_LE((chid - (Pd - Pd.adjoint()) / cplx(0, 2)).cwiseAbs().maxCoeff(), 1e-13);
}

INSTANTIATE_TEST_SUITE_P(Charges, ChiralityAlgebra, ::testing::Values(1, 2, 4));

TEST(Chirality, GroundStateSignsAcrossFlux) {
  const PhaseGrid g(24);
  const auto chi = chirality_chi(g, 1);
  auto ground_chi = [&](double phie, double EC = 1.0) {
    const auto r = ring_eigenpairs(params(10, EC, 0, 1, phie), g);
    return expectation(chi, WaveFunction(g, Basis::Charge, r.eigenvectors[0])).real();
  };
  EXPECT_NEAR(ground_chi(0.0), 0.0, 1e-8);
  // Flux inside (-pi, pi) breaks parity weakly; the residue vanishes deeper in
  // the transmon regime.
  const double weak = std::abs(ground_chi(2.5));
  EXPECT_LT(weak, 0.01 * std::sin(kTwoPi / 3));
  EXPECT_LT(std::abs(ground_chi(2.5, 0.1)), weak);
  const double plus = ground_chi(kTwoPi), minus = ground_chi(-kTwoPi);
  EXPECT_GT(std::abs(plus), 0.1 * std::sin(kTwoPi / 3));
  EXPECT_NEAR(plus, -minus, 1e-8);
  EXPECT_LT(plus, 0.0);  // chiral + branch carries chi = -sin(2 pi N / 3)
}

TEST(PlaneWave, PhysicalSectorAndOffGridRejection) {
  const PhaseGrid g(12);
  const auto s = special_state(g, SpecialState::ChiralPlus);
  EXPECT_NEAR(s.norm(), 1.0, 1e-15);
  const auto proj = apply(physical_sector_projector(g), s);
  EXPECT_NEAR(std::abs(overlap(s, proj)), 1.0, 1e-12);
  EXPECT_THROW(plane_wave_state(g, 0.1, 0.0), ContractError);
}

TEST(FluxFluctuation, AnalyticValues) {
  const auto p = params(10, 0, 0, 1, 0);
  EXPECT_EQ(flux_fluctuation_energy(p, 0.0).analytic, 0.0);
  EXPECT_NEAR(flux_fluctuation_energy(p, 0.1).analytic, 10 * 0.01 / 6, 1e-15);
  EXPECT_THROW(flux_fluctuation_energy(p, 2.0), ContractError);
}

TEST(FluxFluctuation, NumericErrorIsFourthOrder) {
  const PhaseGrid g(12);
  const auto p = params(10, 0, 0, 1, 0);
  const auto a = flux_fluctuation_energy(p, 0.1, &g);
  const auto b = flux_fluctuation_energy(p, 0.2, &g);
  const double ea = *a.numeric - a.analytic;
  const double eb = *b.numeric - b.analytic;
  EXPECT_NEAR(eb / ea, 16.0, 0.5);
  EXPECT_NEAR(*a.numeric, a.exact, 1e-9);
}

TEST(Disorder, SpecialStatesStayDiagonal) {
  const PhaseGrid g(24);
  auto p = params(10, 0, 0, 1, 0);
  auto clean = disorder_diagonality_check(g, p);
  EXPECT_EQ(clean.max_off_diagonal, 0.0);
  for (double phie : {0.0, 0.45}) {
    p.flux = phie;
    p.disorder = {1.0, -0.5, 0.2};
    const auto d = disorder_diagonality_check(g, p);
    EXPECT_LE(d.max_off_diagonal, 1e-10 * p.josephson);
    // Oracle: junction cosines evaluated directly on (phi2, phi3).
    const double e[3] = {11.0, 9.5, 10.2};
    const double a = phie / 3;
    auto energy = [&](double phi2, double phi3) {
      return -(e[0] * std::cos(phi2 - a) + e[1] * std::cos(phi3 - phi2 - a) + e[2] * std::cos(-phi3 - a));
    };
    EXPECT_NEAR(d.matrix(0, 0).real(), energy(0, 0), 1e-12);
    EXPECT_NEAR(d.matrix(1, 1).real(), energy(kTwoPi / 3, -kTwoPi / 3), 1e-12);
    EXPECT_NEAR(d.matrix(2, 2).real(), energy(-kTwoPi / 3, kTwoPi / 3), 1e-12);
    // The chiral splitting is -sqrt3 sin(a) (E1+E2+E3): it needs flux, not disorder.
    const double split = (d.matrix(1, 1) - d.matrix(2, 2)).real();
    EXPECT_NEAR(split, -std::sqrt(3.0) * std::sin(a) * (e[0] + e[1] + e[2]), 1e-11);
  }
}
