#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "czpulse/model.hpp"
#include "czpulse/pulse.hpp"

namespace czpulse {

// Noise environment. Zero entries switch a mechanism off.
struct NoiseSpec {
  std::vector<double> t1_us;         // per mode in model order; 0 means no relaxation
  double flux_a_uphi0sq = 0.0;       // 1/f amplitude A_Phi at 1 Hz, (micro Phi0)^2
  double sigma_uphi0 = 0.0;          // quasistatic flux standard deviation, micro Phi0
  double white_psd_uphi0sq_hz = 0.0;  // white flux PSD, (micro Phi0)^2 / Hz
  double f_ir_hz = 0.01;
  double f_uv_hz = 1e7;

  // Throws ConfigError on negative amplitudes, bad cutoffs or a T1 list that
  // does not match `modes`.
  void validate(std::size_t modes) const;
  // sqrt(2 A ln(f_uv / f_ir)) in micro Phi0.
  double sigma_from_one_over_f() const;
};

enum class Mechanism { transverse, longitudinal };
std::string to_string(Mechanism m);

// Index convention for computational states: 0 = |00>, 1 = |01>, 2 = |10>,
// 3 = |11>, the first qubit being the more significant bit.
struct TransitionRate {
  int source = 0;
  int target = -1;         // computational index, or -1 for a leakage state
  Occupation target_label;  // diabatic label of the final eigenstate (largest component)
  Mechanism mechanism = Mechanism::transverse;
  double rate = 0.0;  // 1/ns
  double gap_ghz = 0.0;
  bool clamped = false;  // longitudinal rate evaluated at the infrared cutoff
};

struct RatePoint {
  double omega_c_ghz = 0.0;
  std::vector<TransitionRate> transitions;
  std::array<std::array<double, 4>, 4> intra{};  // intra[s][t], 1/ns, both mechanisms
  std::array<double, 4> leak{};                  // 1/ns, both mechanisms
  double gamma_ss = 0.0;                         // sum of intra, 1/ns
  double gamma_sl = 0.0;                         // sum of leak, 1/ns
  // d(omega_s - omega_00)/d(omega_c) for s = 01, 10, 11 (dimensionless).
  std::array<double, 3> slope{};
  double domega_dphi_ghz = 0.0;     // coupler frequency per flux quantum; 0 without a flux map
  std::array<double, 3> gamma_phi{};  // signed quasistatic dephasing rates, 1/ns
};

struct RateCurves {
  std::vector<RatePoint> points;  // ascending omega_c
  std::vector<double> omega_c_ghz() const;
  // Linear interpolation in omega_c; throws DomainError outside the grid.
  RatePoint at(double omega_c_ghz) const;
};

// Transverse (T1) rates between adiabatic states at one bias.
std::vector<TransitionRate> transverse_rates(const CircuitModel& model, const NoiseSpec& noise, double omega_c_ghz);
// Longitudinal 1/f flux-noise rates; requires a flux map when A_Phi > 0.
std::vector<TransitionRate> longitudinal_rates(const CircuitModel& model, const NoiseSpec& noise,
                                               double omega_c_ghz);
// Signed quasistatic dephasing rates for |01>, |10>, |11>, 1/ns.
std::array<double, 3> dephasing_rates(const CircuitModel& model, const NoiseSpec& noise, double omega_c_ghz);

// All rates on an ascending grid. Labels are tracked from the circuit idle
// point, which is added to the span when missing.
RateCurves rate_curves(const CircuitModel& model, const NoiseSpec& noise, const std::vector<double>& grid_ghz);
// Grid spanning the pulse excursion and idle, `points` samples.
RateCurves rate_curves_for_pulse(const CircuitModel& model, const NoiseSpec& noise, const PulseShape& pulse,
                                 std::size_t points = 241);

// Integrated transition probabilities gamma-bar * tau along a pulse.
struct IntegratedTransitions {
  std::array<std::array<double, 4>, 4> intra{};
  std::array<double, 4> leak{};
  double gamma_ss_tau = 0.0;
  double gamma_sl_tau = 0.0;
};
IntegratedTransitions integrate_transitions(const RateCurves& curves, const PulseShape& pulse);

enum class DephasingKind { quasistatic, one_over_f, white };
std::string to_string(DephasingKind kind);
DephasingKind dephasing_kind_from_string(const std::string& name);

struct PhaseCovariance {
  DephasingKind kind = DephasingKind::quasistatic;
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Zero();  // rad^2, order 01, 10, 11
  std::vector<double> freq_hz;                       // log grid (1/f only)
  std::vector<std::array<std::complex<double>, 3>> spectra;  // F_m at freq_hz, rad per Phi0
};

// Flux sensitivity d(omega_m - omega_00)/dPhi along the pulse, rad/ns per Phi0,
// one row per pulse sample.
std::vector<std::array<double, 3>> flux_sensitivity(const RateCurves& curves, const PulseShape& pulse);

// F_m(omega) = integral P_m(t) exp(i omega t) dt, rad per Phi0.
std::array<std::complex<double>, 3> sensitivity_spectrum(const std::vector<std::array<double, 3>>& p, double dt_ns,
                                                         double freq_hz);

PhaseCovariance phase_covariance(const RateCurves& curves, const NoiseSpec& noise, const PulseShape& pulse,
                                 DephasingKind kind, std::size_t freq_points = 400);

// Monte-Carlo estimate of the white-noise covariance from `realizations`
// sampled flux traces.
Eigen::Matrix3d white_covariance_monte_carlo(const RateCurves& curves, const NoiseSpec& noise, const PulseShape& pulse,
                                             std::size_t realizations, std::uint64_t seed);

// Closed-form averages over the 60 RB states.
double transition_error(const IntegratedTransitions& t);
double dephasing_error(const Eigen::Matrix3d& covariance);
// Common-origin quasistatic form in terms of eps_phi^s = integral Gamma_phi^s dt.
double quasistatic_dephasing_error(const std::array<double, 3>& eps_phi);
// <dphi_m dphi_n> = 2 eps_m eps_n.
Eigen::Matrix3d quasistatic_covariance(const std::array<double, 3>& eps_phi);

struct RBErrorBreakdown {
  double transition_ss = 0.0;  // (1/5) integral Gamma_SS
  double transition_sl = 0.0;  // (1/4) integral Gamma_SL
  double transition = 0.0;
  double dephasing = 0.0;
  double total = 0.0;
  std::array<double, 3> eps_phi{};  // signed, rad
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

RBErrorBreakdown rb_error(const RateCurves& curves, const NoiseSpec& noise, const PulseShape& pulse,
                          DephasingKind kind = DephasingKind::quasistatic);
RBErrorBreakdown rb_error(const CircuitModel& model, const NoiseSpec& noise, const PulseShape& pulse,
                          DephasingKind kind = DephasingKind::quasistatic);

// The 60 two-qubit states visited with equal probability during RB.
struct RBState {
  std::string name;
  std::string group;  // "basis", "pair" or "quad"
  Eigen::VectorXcd amplitudes;  // length 4, order 00, 01, 10, 11
};
const std::vector<RBState>& rb_states();

struct StateErrorRow {
  std::string name;
  std::string group;
  double dephasing = 0.0;
  double leakage = 0.0;
  double intra = 0.0;
};

struct StateErrorTable {
  std::vector<StateErrorRow> rows;
  double mean_dephasing = 0.0;
  double mean_leakage = 0.0;
  double mean_intra = 0.0;
};

// Per-state errors for an identity or phase-type gate from populations:
// intra s->t costs p_s (1 - p_t) gamma tau, leakage costs p_s gamma tau and
// dephasing is the population-weighted phase variance.
StateErrorTable rb_state_errors(const IntegratedTransitions& t, const Eigen::Matrix3d& covariance);

// Entries exactly as tabulated: one row per basis state, one per pair of
// basis states (all four relative phases share it) and one for the quads.
struct TabulatedRow {
  std::string name;
  double dephasing = 0.0;
  double leakage = 0.0;
  double intra = 0.0;
};
std::vector<TabulatedRow> rb_state_error_rows(const IntegratedTransitions& t, const Eigen::Matrix3d& covariance);

}  // namespace czpulse
