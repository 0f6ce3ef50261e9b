#include <gtest/gtest.h>

#include "jjring/effective.hpp"

using namespace jjring;

namespace {
EffectiveParams params(double g, int chirality = 1) {
  EffectiveParams p;
  p.resonator_frequency = 1.0;
  p.hopping = g;
  p.chirality = chirality;
  return p;
}
std::vector<double> times(double t_end, int n) {
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i] = t_end * i / n;
  return t;
}
}  // namespace

TEST(Coupling, ZeroJunctionGivesZero) { EXPECT_EQ(coupling_g(0.0, 50.0, 1.0, 1), 0.0); }

TEST(Coupling, StaticLimitValue) {
  const double EJr = 2.0, EN = 50.0;
  EXPECT_NEAR(coupling_g(EJr, EN, 0.0, 1), -EJr * EJr / (6 * EN), 1e-15);
  EXPECT_NEAR(coupling_g(EJr, EN, 3.0, 1, CouplingVariant::StaticLimit), -EJr * EJr / (6 * EN), 1e-15);
}

TEST(Coupling, FullAndStaticAgreeToFirstOrder) {
  const double EN = 100.0, EJr = 3.0;
  for (int N : {1, 2}) {
    const double x = 1e-3;
    const double full = coupling_g(EJr, EN, x * EN, N);
    const double stat = coupling_g(EJr, EN, x * EN, N, CouplingVariant::StaticLimit);
    const double rel = full / stat - 1.0;
    const double first_order = 4.0 * N * x / (4.0 * N * N - 1.0);
    EXPECT_NEAR(rel, first_order, 10 * x * x);
  }
}

TEST(Coupling, NormalizationsDifferByTwo) {
  const double a = coupling_g(2.0, 40.0, 1.0, 1, CouplingVariant::Full, CouplingNormalization::Unit);
  const double b = coupling_g(2.0, 40.0, 1.0, 1, CouplingVariant::Full, CouplingNormalization::Half);
  EXPECT_NEAR(a / b, 2.0, 1e-15);
}

TEST(Coupling, PoleIsReported) {
  EXPECT_THROW(coupling_g(1.0, 10.0, 10.0, 1), ContractError);  // x = 2N - 1
  EXPECT_THROW(coupling_g(1.0, 10.0, 30.0, 1), ContractError);  // x = 2N + 1
  EXPECT_THROW(coupling_g(1.0, 0.0, 1.0, 1), ContractError);
}

TEST(EffectiveHamiltonian, SpectrumAndTrace) {
  for (double g : {0.3, -0.2}) {
    for (int c : {1, -1}) {
      const auto H = effective_hamiltonian(params(g, c));
      EXPECT_LE((H - H.adjoint()).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_NEAR(H.trace().real(), 3.0 + 9 * g, 1e-14);
      Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd>(H).eigenvalues();
      std::array<double, 3> expected{1 + 2 * g, 1 + 2 * g, 1 + 5 * g};
      std::sort(expected.begin(), expected.end());
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(ev(i), expected[i], 1e-12);
      auto w = effective_frequencies(params(g, c));
      std::sort(w.begin(), w.end());
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], expected[i], 1e-12);
    }
  }
}

TEST(EffectiveHamiltonian, ChiralityFlipConjugates) {
  const auto a = effective_hamiltonian(params(0.3, 1));
  const auto b = effective_hamiltonian(params(0.3, -1));
  EXPECT_LE((a.conjugate() - b).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(effective_hamiltonian(params(0.3, 0)), ContractError);
}

TEST(Circulation, SymmetricStartKeepsSidesEqual) {
  SingleExcitationState s(1, 0, 0);
  const auto out = circulation(params(0.25), s, times(20.0, 400));
  EXPECT_EQ(out.populations.front()[0], 1.0);
  double avg_b = 0, avg_c = 0;
  for (const auto& P : out.populations) {
    EXPECT_NEAR(P[1], P[2], 1e-12);
    EXPECT_NEAR(P[0] + P[1] + P[2], 1.0, 1e-10);
    avg_b += P[1];
    avg_c += P[2];
  }
  EXPECT_NEAR(avg_b, avg_c, 1e-10);
}

TEST(Circulation, DirectionReversesWithChirality) {
  SingleExcitationState s(1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0);
  const auto t = times(2 * kTwoPi / (3 * 0.25), 4000);
  const auto fwd = first_maxima_order(circulation(params(0.25, 1), s, t));
  const auto bwd = first_maxima_order(circulation(params(0.25, -1), s, t));
  // A cyclic order and its reverse.
  const bool fwd_cyclic = (fwd[1] - fwd[0] + 3) % 3 == (fwd[2] - fwd[1] + 3) % 3;
  EXPECT_TRUE(fwd_cyclic);
  EXPECT_EQ((fwd[1] - fwd[0] + 3) % 3, 3 - (bwd[1] - bwd[0] + 3) % 3);
}

TEST(Circulation, PeriodAndInitialValues) {
  const double g = 0.4;
  SingleExcitationState s(0.6, cplx(0, 0.8), 0);
  const double T = kTwoPi / (3 * g);
  std::vector<double> t{0.0, 0.37, 0.37 + T, 1.9, 1.9 + 2 * T};
  const auto out = circulation(params(g), s, t);
  EXPECT_NEAR(out.populations[0][0], 0.36, 1e-15);
  EXPECT_NEAR(out.populations[0][1], 0.64, 1e-15);
  for (int r = 0; r < 3; ++r) {
    EXPECT_NEAR(out.populations[1][r], out.populations[2][r], 1e-9);
    EXPECT_NEAR(out.populations[3][r], out.populations[4][r], 1e-9);
  }
  SingleExcitationState bad(1, 1, 0);
  EXPECT_THROW(circulation(params(g), bad, t), ContractError);
}
