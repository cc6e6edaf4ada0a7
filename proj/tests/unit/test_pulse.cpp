#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "czpulse/errors.hpp"
#include "czpulse/pulse.hpp"
#include "czpulse/units.hpp"

#include <numbers>

using namespace czpulse;

constexpr double kPi = std::numbers::pi;

namespace {

AdiabaticTable flat_table(double lo, double hi, double d, double zeta_slope = 0.0, double zeta0 = 0.0) {
  std::vector<double> w, dv, z;
  const std::size_t n = 600;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    w.push_back(x);
    dv.push_back(d);
    z.push_back(zeta0 + zeta_slope * (x - hi));
  }
  return AdiabaticTable(w, dv, z, std::vector<bool>(n, false));
}

}  // namespace

TEST(PulseKinds, NamesRoundTrip) {
  for (auto k : {PulseKind::constant, PulseKind::awp, PulseKind::fourier, PulseKind::netzero}) {
    EXPECT_EQ(pulse_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(pulse_kind_from_string("square"), ConfigError);
}

TEST(PulseShape, SamplingAndInterpolation) {
  const PulseShape p = constant_pulse(10.0, 7.5, 0.05);
  EXPECT_EQ(p.samples(), 201u);
  EXPECT_DOUBLE_EQ(p.duration_ns(), 10.0);
  EXPECT_DOUBLE_EQ(p.value_at(3.33), 7.5);
  EXPECT_THROW(constant_pulse(10.0, 7.5, 0.1), DomainError);
  EXPECT_THROW(constant_pulse(0.0, 7.5, 0.01), DomainError);
}

TEST(Fourier, ClosedFormAndEndpoints) {
  const double tg = 30.0;
  const std::vector<double> lam{-0.1, 0.02};
  const PulseShape p = fourier_generate(tg, lam, 7.87, 0.01);
  EXPECT_DOUBLE_EQ(p.omega_c_ghz.front(), 7.87);
  EXPECT_DOUBLE_EQ(p.omega_c_ghz.back(), 7.87);
  const double t = 12.0;
  double dw = 0.0;
  for (int m = 1; m <= 2; ++m) dw += lam[m - 1] * tg / (kTwoPi * m) * (1.0 - std::cos(kTwoPi * m * t / tg));
  EXPECT_NEAR(p.value_at(t), 7.87 + dw / kTwoPi, 1e-12);
}

TEST(Awp, UnitWeightReducesToFourier) {
  const AdiabaticTable table = flat_table(5.0, 8.2, 1.0);
  const std::vector<double> lam{-0.15};
  const PulseShape a = awp_generate(table, 30.0, lam, 7.87, 0.01);
  const PulseShape f = fourier_generate(30.0, lam, 7.87, 0.01);
  ASSERT_EQ(a.samples(), f.samples());
  for (std::size_t k = 0; k < a.samples(); ++k) EXPECT_NEAR(a.omega_c_ghz[k], f.omega_c_ghz[k], 1e-9);
}

TEST(Awp, ConstantWeightScalesExcursion) {
  const std::vector<double> lam{-0.15};
  const PulseShape one = awp_generate(flat_table(5.0, 8.2, 1.0), 30.0, lam, 7.87, 0.02);
  const PulseShape four = awp_generate(flat_table(5.0, 8.2, 4.0), 30.0, lam, 7.87, 0.02);
  const std::size_t mid = one.samples() / 2;
  EXPECT_NEAR(7.87 - four.omega_c_ghz[mid], 0.25 * (7.87 - one.omega_c_ghz[mid]), 1e-9);
}

TEST(Awp, LeavingTableIsDomainError) {
  EXPECT_THROW(awp_generate(flat_table(7.5, 8.2, 1.0), 30.0, {-0.5}, 7.87, 0.02), DomainError);
}

TEST(Table, RejectsNonPositiveD) {
  std::vector<double> w{1, 2, 3, 4}, d{1, 1, 0, 1}, z(4, 0.0);
  EXPECT_THROW(AdiabaticTable(w, d, z, std::vector<bool>(4, false)), DomainError);
}

TEST(Phase, ConstantZetaIntegratesExactly) {
  const double zeta = mhz_to_rad(0.5);
  const AdiabaticTable table = flat_table(5.0, 8.2, 1.0, 0.0, zeta);
  const PulseShape p = fourier_generate(40.0, {-0.1}, 7.87, 0.01);
  EXPECT_NEAR(integrated_zz_phase(table, p), zeta * 40.0, 1e-12);
}

TEST(Phase, CalibrationHitsTarget) {
  // zeta rises linearly below the top of the table.
  const AdiabaticTable table = flat_table(5.0, 8.2, 1.0, -0.3, 0.0);
  auto family = [](const std::vector<double>& l) { return fourier_generate(30.0, l, 8.2, 0.02); };
  const Calibration c = calibrate_conditional_phase(table, family, {-0.1}, kPi, 1e-7);
  EXPECT_NEAR(c.phase, kPi, 1e-6);
  // The mean excursion of a single Fourier component is lambda T / (2 pi)^2 GHz.
  const double lambda = kPi / (-0.3 * 30.0 * 30.0 / (kTwoPi * kTwoPi));
  EXPECT_NEAR(c.lambdas[0], lambda, 1e-5 * std::abs(lambda));
}

TEST(Filter, GaussianHalfPowerAtCutoff) {
  EXPECT_NEAR(filter_transfer(300.0, 300.0, 0.01), 1.0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(filter_transfer(300.0, 0.0, 0.01), 1.0, 1e-12);
  EXPECT_NEAR(gaussian_sigma_ns(300.0), std::sqrt(std::log(2.0)) / (kTwoPi * 0.3), 1e-15);
  EXPECT_THROW(gaussian_sigma_ns(0.0), DomainError);
}

TEST(Filter, PreservesAreaAndSettles) {
  const PulseShape p = fourier_generate(30.0, {-0.1}, 7.87, 0.01);
  const PulseShape f = apply_filter(p, 400.0);
  auto area = [](const PulseShape& s) {
    double a = 0.0;
    for (double w : s.omega_c_ghz) a += w - s.idle_ghz;
    return a * s.dt_ns;
  };
  EXPECT_GT(f.samples(), p.samples());
  EXPECT_NEAR(area(f), area(p), 1e-9 * std::abs(area(p)));
  EXPECT_DOUBLE_EQ(f.omega_c_ghz.back(), 7.87);
  EXPECT_FALSE(f.over_filtered);
  EXPECT_TRUE(apply_filter(p, 200.0).over_filtered);
}

TEST(Distortion, ZeroReflectionIsIdentityAndEchoIsScaledCopy) {
  const PulseShape p = fourier_generate(30.0, {-0.1}, 7.87, 0.01);
  EXPECT_EQ(apply_distortion(p, 0.0, 10.0).omega_c_ghz, p.omega_c_ghz);
  const PulseShape d = apply_distortion(p, 0.1, 10.0);
  ASSERT_EQ(d.samples(), p.samples() + 1000);
  EXPECT_NEAR(d.omega_c_ghz[p.samples() + 500] - 7.87, 0.1 * (p.omega_c_ghz[p.samples() - 500] - 7.87), 1e-12);
  EXPECT_NEAR(d.omega_c_ghz[1500] - 7.87, p.omega_c_ghz[1500] - 7.87 + 0.1 * (p.omega_c_ghz[500] - 7.87), 1e-12);
  EXPECT_THROW(apply_distortion(p, 1.0, 10.0), DomainError);
  EXPECT_THROW(apply_distortion(p, 0.1, 40.0), DomainError);
}

TEST(NetZero, FluxIntegratesToZero) {
  CircuitSpec spec;
  spec.modes = {{"Q1", 6.0, -0.25, 2, false}, {"C", 0.0, -0.3, 2, true}, {"Q2", 5.4, -0.25, 2, false}};
  spec.couplings = {{0, 1, 0.018}, {1, 2, 0.018}};
  spec.qubit_indices = {0, 2};
  spec.coupler_index = 1;
  spec.flux_map = FluxMapSpec{8.2, -0.3};
  const AdiabaticTable table = flat_table(5.0, 8.2, 1.0);
  const PulseShape p = netzero(spec, table, 20.0, {-0.1}, 8.2, 0.02);
  ASSERT_EQ(p.flux_phi0.size(), p.samples());
  const double net = std::accumulate(p.flux_phi0.begin(), p.flux_phi0.end(), 0.0);
  EXPECT_NEAR(net, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(p.omega_c_ghz.back(), 8.2);
  const std::size_t n = p.samples() / 2;
  EXPECT_NEAR(p.omega_c_ghz[n / 2], p.omega_c_ghz[n + n / 2], 1e-9);
  EXPECT_THROW(netzero(spec, table, 20.0, {-0.1}, 7.87, 0.02), DomainError);
}
