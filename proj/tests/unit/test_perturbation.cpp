#include <gtest/gtest.h>

#include <cmath>

#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/perturbation.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

using namespace czpulse;

TEST(Perturbation, SecondOrderDirectCouplingMatchesClosedForm) {
  // Coupler decoupled: only the direct qubit-qubit term contributes at second order.
  CircuitSpec s = reference_circuit({5, std::nullopt});
  for (auto& c : s.couplings) {
    if (c.i == 0 && c.j == 2) c.rho = 0.004;
    else c.rho = 0.0;
  }
  const PerturbativeResult r = zeta_fourth_order_generic(s, 7.5);
  const double g = ghz_to_rad(0.004 * std::sqrt(6.0 * 5.4));
  const double closed = zeta2_direct_closed_form(ghz_to_rad(6.0), ghz_to_rad(5.4), ghz_to_rad(-0.25),
                                                 ghz_to_rad(-0.25), g);
  EXPECT_NEAR(r.zeta_orders[1], closed, 1e-12 * std::abs(closed) + 1e-15);
  EXPECT_DOUBLE_EQ(r.zeta_orders[0], 0.0);
}

TEST(Perturbation, FourthOrderTracksExactInDispersiveRegime) {
  const CircuitSpec s = reference_circuit({5, std::nullopt});
  for (double wc : {7.4, 7.87, 8.5}) {
    const double exact = zz_strength(s, wc);
    const double pert = zeta_fourth_order_generic(s, wc).zeta_total;
    EXPECT_NEAR(pert, exact, 0.25 * std::abs(exact)) << wc;
  }
}

TEST(Perturbation, RejectsNonDispersivePoint) {
  EXPECT_THROW(zeta_fourth_order_generic(reference_circuit({4, 4}), 6.05), DomainError);
}

TEST(Perturbation, EnergyCorrectionsOfGroundState) {
  // E_2 of |000> from counter-rotating terms: -sum g^2 / (omega_i + omega_j).
  CircuitSpec s = reference_circuit({3, std::nullopt});
  const CircuitModel m(s);
  const double wc = 7.87;
  const auto e = energy_corrections(m, {0, 0, 0}, wc);
  double expect = 0.0;
  for (const auto& c : s.couplings) {
    const double g = coupling_strength(s, c.i, c.j, wc);
    expect -= g * g / ghz_to_rad(mode_frequency_ghz(s, c.i, wc) + mode_frequency_ghz(s, c.j, wc));
  }
  EXPECT_DOUBLE_EQ(e[0], 0.0);
  EXPECT_NEAR(e[1], expect, 1e-12);
}

TEST(Simplified, CommonPointOfEqualAnharmonicityParabolas) {
  const double aq = mhz_to_rad(-250);
  const double ac = mhz_to_rad(-300);
  const double nu = 2e-3;
  const ParabolaVertex v = parabola_common_point(aq, ac, nu);
  EXPECT_NEAR(v.g_eff, aq * nu, 1e-15);
  EXPECT_NEAR(v.zeta, 4.0 * (2.0 * ac + aq) * nu * nu, 1e-15);
  // Every detuning passes through it.
  for (double d : {100.0, 150.0, 600.0, 800.0}) {
    EXPECT_NEAR(zeta_simplified(mhz_to_rad(d), aq, aq, ac, v.g_eff, nu), v.zeta, 1e-12);
  }
}

TEST(Simplified, OpeningFlipsAcrossAnharmonicity) {
  const double aq = mhz_to_rad(-250);
  const double ac = mhz_to_rad(-300);
  const double nu = 2e-3;
  auto curvature = [&](double d) {
    const double h = mhz_to_rad(1.0);
    const double g0 = aq * nu;
    return zeta_simplified(mhz_to_rad(d), aq, aq, ac, g0 + h, nu) - 2 * zeta_simplified(mhz_to_rad(d), aq, aq, ac, g0, nu) +
           zeta_simplified(mhz_to_rad(d), aq, aq, ac, g0 - h, nu);
  };
  EXPECT_GT(curvature(150.0), 0.0);
  EXPECT_LT(curvature(600.0), 0.0);
  EXPECT_THROW(zeta_simplified(mhz_to_rad(250), aq, aq, ac, 0.001, nu), DomainError);
}

TEST(Simplified, NuFromCouplingsAndDetunings) {
  const CircuitSpec s = reference_circuit();
  const double wc = 7.87;
  const double g1 = 0.018 * std::sqrt(6.0 * wc);
  const double g2 = 0.018 * std::sqrt(5.4 * wc);
  EXPECT_NEAR(coupling_ratio_nu(s, wc), g1 * g2 / (2.0 * (6.0 - wc) * (5.4 - wc)), 1e-12);
}
