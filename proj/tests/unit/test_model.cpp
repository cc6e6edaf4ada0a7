#include <gtest/gtest.h>

#include <cmath>

#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/model.hpp"
#include "czpulse/units.hpp"

using namespace czpulse;

namespace {

CircuitSpec small(int levels, std::optional<int> cap = std::nullopt) {
  CircuitSpec s = reference_circuit({levels, cap});
  return s;
}

double g_mhz(double rho, double wi, double wj) { return rho * std::sqrt(wi * wj) * 1e3; }

}  // namespace

TEST(FockBasis, ProductAndCappedDimensions) {
  EXPECT_EQ(FockBasis({3, 3, 3}, std::nullopt).dim(), 27u);
  // Occupations of three modes with n_i <= 2 and total <= 2: 1 + 3 + 6.
  EXPECT_EQ(FockBasis({3, 3, 3}, 2).dim(), 10u);
  EXPECT_EQ(CircuitModel(small(6)).dim(), 216u);
}

TEST(FockBasis, IndexRoundTrip) {
  const FockBasis b({4, 4, 4}, 4);
  for (std::size_t k = 0; k < b.dim(); ++k) EXPECT_EQ(static_cast<std::size_t>(b.index_of(b.occupation(k))), k);
  EXPECT_FALSE(b.find({3, 3, 0}).has_value());
  EXPECT_THROW(b.index_of({3, 3, 0}), DomainError);
}

TEST(Hamiltonian, UncoupledDiagonalIsKerrLadder) {
  CircuitSpec s = small(4);
  s.couplings.clear();
  const CircuitModel m(s);
  const HamiltonianMatrix h = m.hamiltonian(7.0);
  const auto& b = m.basis();
  for (std::size_t k = 0; k < b.dim(); ++k) {
    const auto& n = b.occupation(k);
    const double e = 6.0 * n[0] - 0.125 * n[0] * (n[0] - 1) + 7.0 * n[1] - 0.15 * n[1] * (n[1] - 1) + 5.4 * n[2] -
                     0.125 * n[2] * (n[2] - 1);
    EXPECT_NEAR(h.entries(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)), ghz_to_rad(e), 1e-10);
  }
}

TEST(Hamiltonian, KeepsCounterRotatingTerms) {
  const CircuitModel m(small(4));
  const double wc = 7.87;
  const auto h = m.hamiltonian(wc).entries;
  const auto& b = m.basis();
  const double g1c = ghz_to_rad(0.018 * std::sqrt(6.0 * wc));
  const double g12 = ghz_to_rad(0.0015 * std::sqrt(6.0 * 5.4));
  EXPECT_NEAR(h(b.index_of({1, 0, 0}), b.index_of({0, 1, 0})), g1c, 1e-12);
  EXPECT_NEAR(h(b.index_of({0, 0, 0}), b.index_of({1, 1, 0})), g1c, 1e-12);
  EXPECT_NEAR(h(b.index_of({1, 0, 0}), b.index_of({0, 0, 1})), g12, 1e-12);
  // sqrt(2) matrix element of the ladder operator.
  EXPECT_NEAR(h(b.index_of({2, 0, 0}), b.index_of({1, 1, 0})), std::sqrt(2.0) * g1c, 1e-12);
  EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hamiltonian, SectorsAreInvariant) {
  const CircuitModel m(small(4, 4));
  ASSERT_EQ(m.sectors().size(), 2u);
  const auto h = m.hamiltonian(7.2).entries;
  for (const auto& a : m.sectors()) {
    for (const auto& b : m.sectors()) {
      if (&a == &b) continue;
      for (auto i : a)
        for (auto j : b) EXPECT_EQ(h(i, j), 0.0);
    }
  }
}

TEST(Hamiltonian, DerivativeMatchesFiniteDifference) {
  const CircuitModel m(small(3));
  const double w = 7.3;
  const double step = 1e-5;
  const Eigen::MatrixXd fd =
      (m.hamiltonian(w + step).entries - m.hamiltonian(w - step).entries) / (2.0 * ghz_to_rad(step));
  EXPECT_LT((fd - m.coupler_derivative(w)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Coupling, ReferenceStrengthAtIdle) {
  const double g = rad_to_mhz(coupling_strength(reference_circuit(), 0, 1, 7.87));
  EXPECT_NEAR(g, g_mhz(0.018, 6.0, 7.87), 1e-9);
  EXPECT_NEAR(g, 123.7, 0.1);
}

TEST(Coupling, EffectiveCouplingMatchesSchriefferWolffSum) {
  const CircuitSpec s = reference_circuit();
  for (double wc : {7.0, 7.5, 7.87, 8.2}) {
    const double g1 = g_mhz(0.018, 6.0, wc);
    const double g2 = g_mhz(0.018, 5.4, wc);
    const double g12 = g_mhz(0.0015, 6.0, 5.4);
    const double d1 = (6.0 - wc) * 1e3;
    const double d2 = (5.4 - wc) * 1e3;
    const double s1 = (6.0 + wc) * 1e3;
    const double s2 = (5.4 + wc) * 1e3;
    const double expect = g12 + 0.5 * g1 * g2 * (1 / d1 + 1 / d2 - 1 / s1 - 1 / s2);
    EXPECT_NEAR(rad_to_mhz(effective_coupling(s, wc)), expect, 1e-9);
  }
  EXPECT_NEAR(rad_to_mhz(effective_coupling(s, 7.87)), 0.6, 0.3);
}

TEST(Coupling, ZeroOfEffectiveCouplingMatchesSecondOrderFormula) {
  const CircuitSpec s = reference_circuit();
  auto formula = [](double wc) {
    const double g1 = g_mhz(0.018, 6.0, wc);
    const double g2 = g_mhz(0.018, 5.4, wc);
    const double g12 = g_mhz(0.0015, 6.0, 5.4);
    return g12 + 0.5 * g1 * g2 *
                     (1 / ((6.0 - wc) * 1e3) + 1 / ((5.4 - wc) * 1e3) - 1 / ((6.0 + wc) * 1e3) -
                      1 / ((5.4 + wc) * 1e3));
  };
  auto root = [](auto f) {
    double lo = 7.0;
    double hi = 8.5;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return lo;
  };
  const double from_model = root([&](double w) { return effective_coupling(s, w); });
  EXPECT_NEAR(from_model, root(formula), 1e-9);
  EXPECT_GT(from_model, 7.0);
  EXPECT_LT(from_model, 7.87);
}

TEST(FluxMap, SweetSpotAndRoundTrip) {
  const FluxMapSpec map{8.2, -0.3};
  EXPECT_NEAR(flux_to_frequency(map, 0.0).omega_c_ghz, 8.2, 1e-12);
  EXPECT_NEAR(flux_to_frequency(map, 0.0).domega_dphi_ghz, 0.0, 1e-12);
  for (double w : {5.0, 6.5, 7.87, 8.1}) {
    EXPECT_NEAR(flux_to_frequency(map, frequency_to_flux(map, w)).omega_c_ghz, w, 1e-10);
  }
  // (omega_max + |alpha|) sqrt|cos(pi phi)| - |alpha|
  EXPECT_NEAR(flux_to_frequency(map, 0.25).omega_c_ghz, 8.5 * std::sqrt(std::cos(std::numbers::pi / 4)) - 0.3, 1e-12);
}

TEST(CircuitSpec, ValidationRejectsBadInput) {
  CircuitSpec s = reference_circuit();
  s.modes[0].levels = 1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = reference_circuit();
  s.couplings.push_back({0, 7, 0.01});
  EXPECT_THROW(s.validate(), ConfigError);
  s = reference_circuit();
  s.modes[2].tunable = true;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_NO_THROW(reference_circuit().validate());
}

TEST(CircuitSpec, ComputationalLabelsAreBinaryCounter) {
  const auto l = computational_labels(reference_circuit());
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], (Occupation{0, 0, 0}));
  EXPECT_EQ(l[1], (Occupation{0, 0, 1}));
  EXPECT_EQ(l[2], (Occupation{1, 0, 0}));
  EXPECT_EQ(l[3], (Occupation{1, 0, 1}));
  EXPECT_EQ(to_string(l[3]), "|101>");
}

TEST(CircuitModel, RejectsCouplerOutsideRange) {
  const CircuitModel m(small(3));
  EXPECT_THROW(m.hamiltonian(0.5), DomainError);
}
