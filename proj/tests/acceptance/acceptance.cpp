// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "czpulse/dynamics.hpp"
#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/noise.hpp"
#include "czpulse/optimize.hpp"
#include "czpulse/perturbation.hpp"
#include "czpulse/pulse.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

using namespace czpulse;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared state between criteria (gate results feed the hygiene and noise checks).
struct Shared {
  CircuitModel gate_model{gate_circuit()};
  GateOptions options;
  std::shared_ptr<const AdiabaticTable> table;
  std::optional<GateResult> awp30;
  std::optional<GateResult> fourier30;
  std::optional<GateResult> awp24;
  double worst_unitarity = 0.0;

  Shared() {
    options.dt_ns = 0.05;
    options.idle_ghz = 7.87;
    options.optimizer.max_evals = 200;
    options.optimizer.restarts = 3;
    table = make_table(gate_model, 7.87);
  }

  void note(const GateResult& g) { worst_unitarity = std::max(worst_unitarity, g.report.unitarity_error); }
};

Outcome zz_switch_check(Shared&) {
  const ZZSwitch s = zz_switch(reference_circuit({6, std::nullopt}), linspace(5.3, 8.2, 600));
  const bool ok = s.min_abs_khz <= 50.0 && s.max_abs_mhz >= 60.0 && s.on_off_ratio >= 1e4 / 3.0 &&
                  s.on_off_ratio <= 1e4 * 3.0 * 1e3;
  return {ok, fmt("min %.3g kHz, max %.4g MHz, on/off %.3g", s.min_abs_khz, s.max_abs_mhz, s.on_off_ratio)};
}

Outcome locus_check(Shared&) {
  std::string detail;
  bool ok = true;
  for (double d12 : {600.0, 150.0}) {
    LocusOptions o;
    o.delta12_mhz = d12;
    const LocusResult r = residual_zz_locus(o);
    // Independent check of the zero-g_eff curve from the second-order exchange formula.
    FixedCouplingParams p;
    p.delta12_mhz = d12;
    double worst = 0.0;
    for (std::size_t j = 0; j < r.delta1c_mhz.size(); ++j) {
      const double w1 = p.omega1_ghz * 1e3;
      const double w2 = w1 - d12;
      const double wc = w1 - r.delta1c_mhz[j];
      const double g = 0.5 * p.g1c_mhz * p.g2c_mhz * (1 / (w1 - wc) + 1 / (w2 - wc) - 1 / (w1 + wc) - 1 / (w2 + wc));
      worst = std::max(worst, std::abs(-g - r.zero_geff_g12_mhz[j]));
    }
    ok = ok && r.fraction_within >= 0.9 && worst < 1e-9;
    detail += fmt("d12=%g MHz: %.0f%% of columns within one cell; ", d12, 100.0 * r.fraction_within);
  }
  return {ok, detail};
}

Outcome parabola_check(Shared&) {
  const ParabolaResult r = parabola_law();
  int good = 0;
  bool flips = true;
  std::optional<double> below, above;
  for (const auto& f : r.fits) {
    if (f.r_squared > 0.99) ++good;
    const double c2 = f.coeffs[2];
    if (f.delta12_mhz < 250.0) {
      if (below && (*below > 0) != (c2 > 0)) flips = false;
      below = c2;
    } else {
      if (above && (*above > 0) != (c2 > 0)) flips = false;
      above = c2;
    }
  }
  flips = flips && below && above && ((*below > 0) != (*above > 0));
  // Prediction from the coupling ratio, independent of the fits.
  const double nu = ParabolaOptions{}.nu;
  const double g_pred = -250.0 * nu;
  const double z_pred = 4.0 * (2.0 * -300.0 + -250.0) * nu * nu;
  const double eg = std::abs(r.common_g_mhz - g_pred) / std::abs(g_pred);
  const double ez = std::abs(r.common_zeta_mhz - z_pred) / std::abs(z_pred);
  const bool ok = good >= 3 && eg <= 0.3 && ez <= 0.3 && flips;
  double min_r2 = 1.0;
  for (const auto& f : r.fits) min_r2 = std::min(min_r2, f.r_squared);
  return {ok, fmt("%d fits with R^2 > 0.99 (min %.6f); common point (%.4g, %.4g) MHz vs (%.4g, %.4g), off by %.1f%% "
                  "and %.1f%%; opening %s",
                  good, min_r2, r.common_g_mhz, r.common_zeta_mhz, g_pred, z_pred, 100 * eg, 100 * ez,
                  flips ? "flips" : "does not flip")};
}

Outcome awp_check(Shared& s) {
  std::string detail;
  bool ok = true;
  for (double tg : {24.0, 26.0, 30.0, 36.0, 40.0}) {
    const GateResult g = optimize_pulse(s.gate_model, tg, s.options, s.table);
    s.note(g);
    if (tg == 30.0) s.awp30 = g;
    if (tg == 24.0) s.awp24 = g;
    ok = ok && g.report.epg <= 1e-4;
    detail += fmt("%g ns %.2e; ", tg, g.report.epg);
  }
  GateOptions f = s.options;
  f.kind = PulseKind::fourier;
  const GateResult fourier = optimize_pulse(s.gate_model, 30.0, f, s.table);
  s.note(fourier);
  s.fourier30 = fourier;
  const double gain = fourier.report.epg / s.awp30->report.epg;
  ok = ok && gain >= 10.0;
  detail += fmt("Fourier 30 ns %.2e (%.0fx worse)", fourier.report.epg, gain);
  return {ok, detail};
}

Outcome robustness_check(Shared& s) {
  GateOptions o = s.options;
  o.optimizer.restarts = 1;
  o.optimizer.max_evals = 120;
  if (s.awp30) o.initial_lambdas = s.awp30->lambdas;
  const auto rows = robustness_scan(gate_circuit(), 30.0, standard_deviations(), o);
  double worst = 0.0;
  std::string which;
  for (const auto& r : rows) {
    s.note(r.result);
    if (r.result.report.epg > worst) {
      worst = r.result.report.epg;
      which = fmt("%s %+g", r.deviation.parameter.c_str(), r.deviation.delta);
    }
  }
  return {rows.size() == 16 && worst <= 1e-4,
          fmt("%zu deviations, worst EPG %.2e (%s)", rows.size(), worst, which.c_str())};
}

Outcome perturbation_check(Shared&) {
  FixedCouplingParams base;
  const auto rows = perturbation_grid(base, linspace(7.0, 9.0, 9), {0.0, 5.0, 10.0, 15.0});
  int n = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (!r.dispersive) continue;
    ++n;
    const double rel = std::abs(r.zeta_generic_mhz - r.zeta_exact_mhz) / std::abs(r.zeta_exact_mhz);
    worst = std::isfinite(rel) ? std::max(worst, rel) : std::numeric_limits<double>::infinity();
  }
  // Second-order term with only the direct coupling, against a hand-written sum
  // over the one- and two-photon intermediate states.
  CircuitSpec t = reference_circuit({5, std::nullopt});
  for (auto& c : t.couplings) c.rho = (c.i == 0 && c.j == 2) ? 0.004 : 0.0;
  const double wc = 7.0;
  const PerturbativeResult pr = zeta_fourth_order_generic(t, wc);
  const double g = coupling_strength(t, 0, 2, wc);
  const double w1 = ghz_to_rad(6.0), w2 = ghz_to_rad(5.4), a = ghz_to_rad(-0.25);
  // E2 of |00>, |10>, |01>, |11> with V = g (a1 + a1^dag)(a2 + a2^dag).
  const double e00 = -g * g / (w1 + w2);
  const double e10 = g * g / (w1 - w2) - 2 * g * g / (w1 + w2 + a);
  const double e01 = g * g / (w2 - w1) - 2 * g * g / (w1 + w2 + a);
  const double e11 = g * g / (w1 + w2) + 2 * g * g / (w1 - w2 - a) + 2 * g * g / (w2 - w1 - a) -
                     4 * g * g / (w1 + w2 + 2 * a);
  const double oracle = e11 - e10 - e01 + e00;
  const double printed = zeta2_direct_closed_form(w1, w2, a, a, g);
  const double d_oracle = std::abs(pr.zeta_orders[1] - oracle) / std::abs(oracle);
  const double d_printed = std::abs(printed - pr.zeta_orders[1]) / std::abs(oracle);
  const bool ok = n >= 10 && worst <= 0.25 && d_oracle < 1e-12 && d_printed < 1e-12;
  return {ok, fmt("%d dispersive points, worst relative deviation %.1f%%; second order vs closed form %.1e, vs "
                  "state sum %.1e",
                  n, 100 * worst, d_printed, d_oracle)};
}

Outcome null_check(Shared&) {
  const NullTest r = two_level_null_test(reference_circuit({6, std::nullopt}), 6.2);
  return {r.ratio < 1e-3,
          fmt("|zeta| two-level %.2e MHz vs full %.3g MHz, ratio %.1e", std::abs(r.zeta_two_level_mhz),
              std::abs(r.zeta_full_mhz), r.ratio)};
}

Outcome rb_algebra_check(Shared&) {
  const auto& states = rb_states();
  double intra = 0.0, leak = 0.0, diag = 0.0, cross = 0.0;
  for (const auto& st : states) {
    double p[4];
    for (int k = 0; k < 4; ++k) p[k] = std::norm(st.amplitudes(k));
    intra += p[1] * (1.0 - p[2]);  // any ordered pair s != t
    leak += p[3];
    diag += p[1] - p[1] * p[1];
    cross -= 2.0 * p[1] * p[2];
  }
  const double n = static_cast<double>(states.size());
  intra /= n;
  leak /= n;
  diag /= n;
  cross /= n;
  double dev = std::max({std::abs(intra - 0.2), std::abs(leak - 0.25), std::abs(diag - 0.15), std::abs(cross + 0.1)});
  // The library's closed forms against the brute-force averages for random inputs.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  double closed = 0.0, rank1 = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = gauss(rng);
    const Eigen::Matrix3d c = a * a.transpose();
    double avg = 0.0;
    for (const auto& st : states) {
      double p[4];
      for (int k = 0; k < 4; ++k) p[k] = std::norm(st.amplitudes(k));
      for (int m = 0; m < 3; ++m) {
        avg += p[m + 1] * c(m, m);
        for (int l = 0; l < 3; ++l) avg -= p[m + 1] * p[l + 1] * c(m, l);
      }
    }
    closed = std::max(closed, std::abs(avg / n - dephasing_error(c)));
    const std::array<double, 3> e{gauss(rng), gauss(rng), gauss(rng)};
    rank1 = std::max(rank1, std::abs(quasistatic_dephasing_error(e) - dephasing_error(quasistatic_covariance(e))));
  }
  dev = std::max(dev, closed);
  return {dev < 1e-12 && rank1 < 1e-12,
          fmt("coefficients (%.4f, %.4f, %.4f, %.4f), max deviation %.1e; quasistatic form %.1e", intra, leak, diag,
              cross, dev, rank1)};
}

Outcome noise_oracle_check(Shared& s) {
  // Lindblad against the rate integral, on the calibrated 30 ns pulse.
  const CircuitModel& m = s.gate_model;
  const PulseShape pulse = s.awp30 ? s.awp30->pulse : calibrated_awp(m, 30.0, s.options);
  const NoiseSpec noise = reference_noise();
  const RateCurves curves = rate_curves_for_pulse(m, noise, pulse);
  const RBErrorBreakdown rb = rb_error(curves, noise, pulse);
  std::vector<JumpSpec> jumps;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      jumps.push_back({[&curves, &pulse, a, b](double t) { return curves.at(pulse.value_at(t)).intra[a][b]; }, a, b});
    }
    jumps.push_back({[&curves, &pulse, a](double t) { return curves.at(pulse.value_at(t)).leak[a]; }, a, std::nullopt});
  }
  const double lind = lindblad_rb_error(m, pulse, jumps);
  const IntegratedTransitions it = integrate_transitions(curves, pulse);
  const double integrated = it.gamma_ss_tau + it.gamma_sl_tau;
  const double rel_tr = std::abs(lind - rb.transition) / rb.transition;

  // White flux noise: analytic covariance against sampled flux traces.
  NoiseSpec white;
  white.t1_us = {0.0, 0.0, 0.0};
  white.white_psd_uphi0sq_hz = 1e-3;
  const RateCurves wc = rate_curves_for_pulse(m, white, pulse);
  const PhaseCovariance analytic = phase_covariance(wc, white, pulse, DephasingKind::white);
  const auto sens = flux_sensitivity(wc, pulse);
  const double psd = white.white_psd_uphi0sq_hz * 1e-12 * 1e9;  // Phi0^2 ns
  const double dt = pulse.dt_ns;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  const std::size_t realizations = 20000;
  Eigen::Matrix3d mc = Eigen::Matrix3d::Zero();
  for (std::size_t r = 0; r < realizations; ++r) {
    Eigen::Vector3d phi = Eigen::Vector3d::Zero();
    // Delta-correlated flux, <Phi(t) Phi(t')> = S delta(t - t'), held constant over each step.
    for (std::size_t k = 0; k + 1 < sens.size(); ++k) {
      const double x = gauss(rng) * std::sqrt(psd / dt);
      for (int q = 0; q < 3; ++q) phi(q) += 0.5 * (sens[k][q] + sens[k + 1][q]) * dt * x;
    }
    mc += phi * phi.transpose();
  }
  mc /= static_cast<double>(realizations);
  const double rel_cov = (mc - analytic.matrix).norm() / analytic.matrix.norm();
  const double rel_err = std::abs(dephasing_error(mc) - dephasing_error(analytic.matrix)) / dephasing_error(analytic.matrix);
  const bool ok = integrated < 0.01 && rel_tr <= 0.10 && rel_cov <= 0.05 && rel_err <= 0.05;
  return {ok, fmt("integrated rate %.2e, eps_tr %.3e vs Lindblad %.3e (%.1f%%); white covariance vs %zu-trace "
                  "Monte Carlo %.1f%% (error %.1f%%)",
                  integrated, rb.transition, lind, 100 * rel_tr, realizations, 100 * rel_cov, 100 * rel_err)};
}

Outcome projection_check(Shared& s) {
  const PulseShape pulse = s.awp30 ? s.awp30->pulse : calibrated_awp(s.gate_model, 30.0, s.options);
  const RBErrorBreakdown e = rb_error(s.gate_model, improved_noise(), pulse);
  return {e.transition >= 3e-6 && e.transition <= 3e-5,
          fmt("eps_tr %.2e (SS %.2e, SL %.2e), eps_phi %.2e", e.transition, e.transition_ss, e.transition_sl,
              e.dephasing)};
}

Outcome stray_check(Shared& s) {
  GateOptions o = s.options;
  o.optimizer.restarts = 1;
  o.optimizer.max_evals = 60;
  o.optimizer.xtol = 1e-4;
  const std::vector<double> strengths{0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  const auto rows = stray_scan(FiveModeOptions{}, {StrayKind::qubit_coupler, StrayKind::coupler_coupler}, strengths,
                               30.0, o, false);
  std::vector<double> qc, cc;
  for (const auto& r : rows) {
    s.worst_unitarity = std::max(s.worst_unitarity, r.unitarity_error);
    (r.kind == StrayKind::qubit_coupler ? qc : cc).push_back(r.epg);
  }
  const auto peak = static_cast<std::size_t>(std::max_element(qc.begin(), qc.end()) - qc.begin());
  const bool interior = peak > 0 && peak + 1 < qc.size();
  const double at = strengths[peak];
  bool lower = qc.size() == cc.size();
  for (std::size_t k = 0; k < std::min(qc.size(), cc.size()); ++k) lower = lower && cc[k] < qc[k];
  std::string curve;
  for (std::size_t k = 0; k < qc.size(); ++k) curve += fmt("%g:%.1e/%.1e ", strengths[k], qc[k], cc[k]);
  const bool ok = interior && at >= 0.5 && at <= 20.0 && lower;
  return {ok, fmt("qc maximum at %g MHz (%s), cc below qc at every strength: %s; qc/cc EPG %s", at,
                  interior ? "interior" : "at the edge", lower ? "yes" : "no", curve.c_str())};
}

Outcome hygiene_check(Shared& s) {
  std::string detail;
  double worst_dt = 0.0;
  std::vector<std::pair<std::string, const GateResult*>> gates;
  if (s.awp30) gates.push_back({"AWP 30 ns", &*s.awp30});
  if (s.awp24) gates.push_back({"AWP 24 ns", &*s.awp24});
  if (s.fourier30) gates.push_back({"Fourier 30 ns", &*s.fourier30});
  if (gates.empty()) {
    s.awp30 = optimize_pulse(s.gate_model, 30.0, s.options, s.table);
    gates.push_back({"AWP 30 ns", &*s.awp30});
  }
  for (const auto& [name, g] : gates) {
    GateOptions half = s.options;
    half.kind = g->pulse.kind;
    half.dt_ns = s.options.dt_ns / 2.0;
    const GateResult fine = evaluate_gate(s.gate_model, *s.table, g->pulse.nominal_gate_time_ns, g->lambdas, half);
    s.note(fine);
    const double rel = std::abs(fine.report.epg - g->report.epg) / g->report.epg;
    worst_dt = std::max(worst_dt, rel);
    detail += fmt("%s %.3e -> %.3e; ", name.c_str(), g->report.epg, fine.report.epg);
  }
  return {s.worst_unitarity <= 1e-8 && worst_dt <= 0.05,
          detail + fmt("max |U^dag U - 1| %.1e, max dt-halving change %.2f%%", s.worst_unitarity, 100 * worst_dt)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome(Shared&)> run;
  };
  const std::vector<Criterion> criteria{
      {"zz-switch", zz_switch_check},
      {"residual-zz-locus", locus_check},
      {"parabola-law", parabola_check},
      {"awp-performance", awp_check},
      {"robustness", robustness_check},
      {"perturbation-agreement", perturbation_check},
      {"two-level-null", null_check},
      {"rb-algebra", rb_algebra_check},
      {"noise-model-oracle", noise_oracle_check},
      {"improved-noise-projection", projection_check},
      {"stray-coupling-structure", stray_check},
      {"numerical-hygiene", hygiene_check},
  };
  Shared shared;
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(shared);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    std::printf("%s %2d %-26s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
