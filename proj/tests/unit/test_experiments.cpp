#include <gtest/gtest.h>

#include <cmath>

#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/units.hpp"

using namespace czpulse;

TEST(Circuits, ReferenceValues) {
  const CircuitSpec s = reference_circuit();
  ASSERT_EQ(s.modes.size(), 3u);
  EXPECT_DOUBLE_EQ(s.modes[0].frequency_ghz, 6.0);
  EXPECT_DOUBLE_EQ(s.modes[2].frequency_ghz, 5.4);
  EXPECT_TRUE(s.modes[1].tunable);
  EXPECT_DOUBLE_EQ(s.coupling_rho(0, 1), 0.018);
  EXPECT_DOUBLE_EQ(s.coupling_rho(0, 2), 0.0015);
  EXPECT_DOUBLE_EQ(*s.idle_ghz, 7.87);
  EXPECT_EQ(s.modes[0].levels, 6);
}

TEST(Circuits, FixedCouplingsHitRequestedStrengths) {
  FixedCouplingParams p;
  p.g12_mhz = 7.0;
  const CircuitSpec s = fixed_coupling_circuit(p, 8.5);
  EXPECT_NEAR(rad_to_mhz(coupling_strength(s, 0, 1, 8.5)), 120.0, 1e-9);
  EXPECT_NEAR(rad_to_mhz(coupling_strength(s, 1, 2, 8.5)), 100.0, 1e-9);
  EXPECT_NEAR(rad_to_mhz(coupling_strength(s, 0, 2, 8.5)), 7.0, 1e-9);
  EXPECT_DOUBLE_EQ(s.modes[2].frequency_ghz, 5.4);
}

TEST(Circuits, ZeroEffectiveCouplingCondition) {
  FixedCouplingParams p;
  p.delta12_mhz = 150.0;
  for (double d1c : {-2500.0, -1500.0}) {
    const double wc = p.omega1_ghz - d1c * 1e-3;
    p.g12_mhz = zero_geff_g12_mhz(p, d1c);
    EXPECT_GT(p.g12_mhz, 0.0);
    const CircuitSpec s = fixed_coupling_circuit(p, wc);
    EXPECT_NEAR(effective_coupling(s, wc), 0.0, 1e-12);
  }
}

TEST(Closed, DirectSecondOrderTerm) {
  // Two coupled transmons, no coupler: only three-level and counter-rotating
  // virtual transitions contribute at second order.
  const double w1 = 30.0, w2 = 33.0, a = -1.5, g = 0.1;
  const double z = zeta2_direct_closed_form(w1, w2, a, a, g);
  const double rwa = 2 * g * g * (1.0 / (w1 - w2 - a) - 1.0 / (w1 - w2 + a));
  EXPECT_NEAR(z, rwa + 2 * g * g * (2.0 / (w1 + w2 + a) - 2.0 / (w1 + w2 + 2 * a)), 1e-15);
}

TEST(NullTest, TwoLevelTruncationHasNoZz) {
  const NullTest r = two_level_null_test(reference_circuit({5, std::nullopt}), 7.5);
  EXPECT_GT(std::abs(r.zeta_full_mhz), 0.01);
  EXPECT_LT(r.ratio, 1e-6);
}

TEST(Deviations, ParseUnitsAndErrors) {
  Deviation d = parse_deviation("omega1,+10MHz");
  EXPECT_EQ(d.parameter, "omega1");
  EXPECT_DOUBLE_EQ(d.delta, 10.0);
  EXPECT_DOUBLE_EQ(parse_deviation("alphac,-0.01GHz").delta, -10.0);
  EXPECT_DOUBLE_EQ(parse_deviation("rho12,-10%").delta, -0.1);
  EXPECT_DOUBLE_EQ(parse_deviation("rho1c,0.05").delta, 0.05);
  EXPECT_THROW(parse_deviation("omega3,10MHz"), ConfigError);
  EXPECT_THROW(parse_deviation("omega1"), ConfigError);
  EXPECT_THROW(parse_deviation("omega1,ten"), ConfigError);
  EXPECT_THROW(parse_deviation("rho12,10MHz"), ConfigError);
}

TEST(Deviations, ApplyChangesOneParameter) {
  const CircuitSpec base = gate_circuit();
  const CircuitSpec a = apply_deviation(base, {"omega2", -10.0});
  EXPECT_NEAR(a.modes[2].frequency_ghz, 5.39, 1e-12);
  EXPECT_DOUBLE_EQ(a.modes[0].frequency_ghz, base.modes[0].frequency_ghz);
  const CircuitSpec b = apply_deviation(base, {"rho12", 0.1});
  EXPECT_NEAR(b.coupling_rho(0, 2), 0.0015 * 1.1, 1e-15);
  EXPECT_DOUBLE_EQ(b.coupling_rho(0, 1), 0.018);
  EXPECT_EQ(standard_deviations().size(), 16u);
}

TEST(Stray, KindNamesAndFiveModeLayout) {
  for (auto k : {StrayKind::none, StrayKind::qubit_qubit, StrayKind::coupler_coupler, StrayKind::qubit_coupler}) {
    EXPECT_EQ(stray_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(stray_kind_from_string("cq"), ConfigError);
  FiveModeOptions o;
  o.idle_c2_ghz = 7.5;
  const CircuitSpec s = five_mode_circuit(o, StrayKind::qubit_coupler, 4.0);
  ASSERT_EQ(s.modes.size(), 5u);
  EXPECT_EQ(s.qubit_indices, (std::vector<int>{0, 2, 4}));
  EXPECT_NEAR(rad_to_mhz(coupling_strength(s, 1, 4, o.idle_c1_ghz)), 4.0, 1e-9);
  EXPECT_DOUBLE_EQ(five_mode_circuit(o, StrayKind::none, 0.0).couplings.size(), 6u);
  const CircuitSpec cc = five_mode_circuit(o, StrayKind::coupler_coupler, 2.0);
  EXPECT_NEAR(rad_to_mhz(coupling_strength(cc, 1, 3, o.idle_c1_ghz)), 2.0, 1e-9);
}

TEST(Stray, SecondCouplerIdleMinimizesZz) {
  const FiveModeOptions o;
  const double c2 = second_coupler_idle(o);
  EXPECT_GT(c2, 7.1);
  EXPECT_LT(c2, 8.9);
}

TEST(Idle, ReferenceIdleIsZzMinimum) {
  const CircuitSpec s = reference_circuit({4, 4});
  const double idle = find_idle(s, 7.5, 8.2);
  EXPECT_NEAR(idle, 7.87, 0.05);
  const double z0 = std::abs(zz_strength(s, idle));
  EXPECT_LT(z0, std::abs(zz_strength(s, idle - 0.05)));
  EXPECT_LT(z0, std::abs(zz_strength(s, idle + 0.05)));
}

TEST(Schemes, CircuitsAndNames) {
  for (const char* n : {"CAQ-D", "CAQ-U", "CBQ-U", "CBQ-D"}) EXPECT_NO_THROW(scheme_circuit(n).validate()) << n;
  EXPECT_THROW(scheme_circuit("XYZ"), ConfigError);
}

TEST(Registry, KnownExperimentsAndUnknownAxis) {
  RegistryContext ctx;
  ctx.gate.dt_ns = 0.05;
  const ExperimentRegistry reg = default_registry(ctx);
  for (const char* id : {"zeta", "gate", "designmap", "locus", "noise_rates", "stray", "perturbation"}) {
    EXPECT_TRUE(reg.contains(id)) << id;
  }
  const auto& zeta = reg.get("zeta");
  const std::vector<double> v = zeta.run({{"omega_c_ghz", 7.5}}, 0);
  ASSERT_EQ(v.size(), zeta.outputs.size());
  EXPECT_NEAR(v[0], rad_to_mhz(zz_strength(gate_circuit(), 7.5)), 1e-9);
  EXPECT_THROW(zeta.run({{"bogus", 1.0}}, 0), ConfigError);
}
