#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <set>

#include "czpulse/dynamics.hpp"
#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/noise.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

using namespace czpulse;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cd(g(rng), g(rng));
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

Eigen::MatrixXcd diag_phases(double a, double b, double c, double d) {
  Eigen::VectorXcd v(4);
  v << std::polar(1.0, a), std::polar(1.0, b), std::polar(1.0, c), std::polar(1.0, d);
  return v.asDiagonal();
}

double twirl_oracle(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& t) {
  return 0.8 * (1.0 - std::norm((t.adjoint() * u).trace() / 4.0));
}

}  // namespace

TEST(Phases, WrapIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_phase(kPi), kPi);
  EXPECT_NEAR(wrap_phase(-kPi), kPi, 1e-15);
  EXPECT_NEAR(wrap_phase(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_phase(0.3 + 4 * kPi), 0.3, 1e-12);
}

TEST(Targets, ControlledPhaseOnChosenPair) {
  const Eigen::MatrixXcd t = controlled_phase_target(3, 0, 2);
  for (int k = 0; k < 8; ++k) {
    const bool both = (k & 4) && (k & 1);
    EXPECT_NEAR(std::abs(t(k, k) - (both ? cd(-1) : cd(1))), 0.0, 1e-15) << k;
  }
}

TEST(Epg, ZeroForTargetUpToLocalZ) {
  const Eigen::MatrixXcd cz = controlled_phase_target(2, 0, 1);
  EXPECT_NEAR(epg(cz, cz).epg, 0.0, 1e-14);
  const Eigen::MatrixXcd dressed = diag_phases(0.0, 0.4, -1.1, 0.4 - 1.1 + kPi) * std::polar(1.0, 0.7);
  EXPECT_NEAR(epg(dressed, cz).epg, 0.0, 1e-12);
}

TEST(Epg, IdentityAgainstCzMatchesBruteForce) {
  const Eigen::MatrixXcd cz = controlled_phase_target(2, 0, 1);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(4, 4);
  double best = 1.0;
  const int n = 360;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = 2 * kPi * i / n;
      const double b = 2 * kPi * j / n;
      const Eigen::MatrixXcd z = diag_phases(0.0, b, a, a + b);
      best = std::min(best, 1.0 - std::norm((cz.adjoint() * z * id).trace() / 4.0));
    }
  }
  EXPECT_NEAR(epg(id, cz).epg, best, 1e-9);
  EXPECT_NEAR(best, 0.5, 1e-9);
}

TEST(RbStates, SixtyNormalizedDistinctStates) {
  const auto& states = rb_states();
  ASSERT_EQ(states.size(), 60u);
  std::set<std::string> names;
  for (const auto& s : states) {
    EXPECT_NEAR(s.amplitudes.norm(), 1.0, 1e-14);
    names.insert(s.name);
  }
  EXPECT_EQ(names.size(), 60u);
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      EXPECT_LT(std::abs(states[i].amplitudes.dot(states[j].amplitudes)), 1.0 - 1e-9);
}

TEST(RbStates, AverageMatchesTwirlOracle) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXcd cz = controlled_phase_target(2, 0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXcd u = random_unitary(4, rng);
    EXPECT_NEAR(state_averaged_error(u, cz), twirl_oracle(u, cz), 1e-12);
  }
  const Eigen::MatrixXcd near = diag_phases(0.01, -0.02, 0.03, kPi + 0.05);
  EXPECT_NEAR(state_averaged_error(near, cz), twirl_oracle(near, cz), 1e-14);
  EXPECT_THROW(state_averaged_error(Eigen::MatrixXcd::Identity(8, 8), cz), DomainError);
}

TEST(Propagation, ConstantPulseMatchesSpectralExponential) {
  const CircuitModel m(reference_circuit({3, std::nullopt}));
  const PulseShape p = constant_pulse(5.0, 7.5, 0.05);
  const Eigen::MatrixXcd u = propagate(m, p);
  EXPECT_LT(unitarity_error(u), 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.hamiltonian(7.5).entries);
  Eigen::VectorXcd ph(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * 5.0);
  const Eigen::MatrixXcd exact = es.eigenvectors().cast<cd>() * ph.asDiagonal() * es.eigenvectors().transpose().cast<cd>();
  EXPECT_LT((u - exact).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Propagation, IdleGateAccumulatesZetaTimesT) {
  const CircuitSpec spec = reference_circuit({4, 4});
  const CircuitModel m(spec);
  const double wc = 7.3;
  const double t = 20.0;
  const GateReport r = computational_unitary(propagate(m, constant_pulse(t, wc, 0.05)), m, wc);
  EXPECT_NEAR(r.phi_zz, wrap_phase(zz_strength(m, wc) * t), 1e-8);
  EXPECT_LT(r.leakage_total, 1e-12);
  EXPECT_THROW(computational_unitary(Eigen::MatrixXcd::Identity(m.dim(), m.dim()), m, wc, {0, 0}), DomainError);
}

TEST(Lindblad, NoJumpsIsUnitary) {
  const CircuitModel m(reference_circuit({3, 4}));
  const PulseShape p = constant_pulse(4.0, 7.87, 0.05);
  Eigen::VectorXcd psi(4);
  psi << 0.5, 0.5, cd(0, 0.5), -0.5;
  const LindbladResult r = lindblad_propagate(m, p, {}, psi);
  EXPECT_NEAR(r.trace, 1.0, 1e-9);
  EXPECT_GT(r.min_eigenvalue, -1e-9);
  EXPECT_NEAR(lindblad_state_error(m, p, {}, psi), 0.0, 1e-8);
}

TEST(Lindblad, DecayOfSingleStateIsExponential) {
  const CircuitModel m(reference_circuit({3, 4}));
  const double t = 10.0;
  const double gamma = 0.01;
  const PulseShape p = constant_pulse(t, 7.87, 0.05);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi(1) = 1.0;
  const std::vector<JumpSpec> relax{{[gamma](double) { return gamma; }, 1, 0}};
  EXPECT_NEAR(lindblad_state_error(m, p, relax, psi), 1.0 - std::exp(-gamma * t), 1e-6);
  const std::vector<JumpSpec> leak{{[gamma](double) { return gamma; }, 1, std::nullopt}};
  const LindbladResult r = lindblad_propagate(m, p, leak, psi);
  EXPECT_NEAR(r.leaked_population, 1.0 - std::exp(-gamma * t), 1e-6);
  EXPECT_NEAR(r.trace, 1.0, 1e-6);
}
