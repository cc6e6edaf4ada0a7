#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "czpulse/dynamics.hpp"
#include "czpulse/model.hpp"
#include "czpulse/noise.hpp"
#include "czpulse/optimize.hpp"
#include "czpulse/pulse.hpp"
#include "czpulse/spectrum.hpp"

namespace czpulse {

struct Truncation {
  int levels = 6;
  std::optional<int> max_excitations;
};

// Two transmons (6.0 and 5.4 GHz, -250 MHz) around a -300 MHz coupler with
// rho = 0.018, 0.018, 0.0015, idling at 7.87 GHz, split-transmon map up to 8.2 GHz.
CircuitSpec reference_circuit(Truncation t = {});
// Reference circuit at the truncation used for gate simulations (levels 4, at most 4 photons).
CircuitSpec gate_circuit();

// Qubit-coupler-qubit circuit with couplings fixed in MHz at one coupler bias.
struct FixedCouplingParams {
  double omega1_ghz = 6.0;
  double delta12_mhz = 600.0;  // omega_1 - omega_2
  double g1c_mhz = 120.0;
  double g2c_mhz = 100.0;
  double g12_mhz = 0.0;
  double alpha1_mhz = -250.0;
  double alpha2_mhz = -250.0;
  double alphac_mhz = -300.0;
};
CircuitSpec fixed_coupling_circuit(const FixedCouplingParams& p, double omega_c_ghz, Truncation t = {4, 4});

// Tunable Q2 (idle 8.0 GHz) coupled directly to Q1 at 6.0 GHz with rho = 0.005.
CircuitSpec coupler_free_circuit(Truncation t = {4, std::nullopt});

// Reference circuit with scaled couplings (g_qc of about 70, 105 or 175 MHz) and its own idle point.
CircuitSpec coupling_variant(double rho_qc, double rho_qq, Truncation t = {4, 4});

// ---------------------------------------------------------------- spectra

struct ZZCurve {
  std::vector<double> omega_c_ghz;
  std::vector<double> zeta_mhz;
  std::vector<double> g_eff_mhz;  // NaN when undefined
  std::vector<double> d_factor;
  std::vector<bool> d_divergent;
};
ZZCurve zz_curve(const CircuitModel& model, const std::vector<double>& grid_ghz, const TrackingOptions& options = {});

struct ZZSwitch {
  ZZCurve with_direct;
  ZZCurve without_direct;
  double min_abs_khz = 0.0;
  double max_abs_mhz = 0.0;
  double on_off_ratio = 0.0;
};
// |zeta| over the grid with and without the direct qubit-qubit coupling.
ZZSwitch zz_switch(const CircuitSpec& spec, const std::vector<double>& grid_ghz);

struct SpectrumRow {
  double omega_c_ghz;
  std::string label;
  double energy_ghz;
};
// Tracked adiabatic energies of every Fock state up to `max_photons` total photons.
std::vector<SpectrumRow> tracked_spectrum(const CircuitModel& model, const std::vector<double>& grid_ghz,
                                          int max_photons = 2);

// Coupler bias in [lo, hi] minimizing |zeta| (grid search refined by golden section).
double find_idle(const CircuitSpec& spec, double lo_ghz, double hi_ghz, std::size_t samples = 121);

// ------------------------------------------------------- residual-ZZ locus

struct LocusOptions {
  double delta12_mhz = 600.0;
  double delta1c_lo_mhz = -3000.0;
  double delta1c_hi_mhz = -1000.0;
  double g12_lo_mhz = 0.0;
  double g12_hi_mhz = 30.0;
  std::size_t n_delta = 50;
  std::size_t n_g12 = 50;
  Truncation truncation{4, 4};
};

struct LocusResult {
  std::vector<double> delta1c_mhz;
  std::vector<double> g12_mhz;
  Eigen::MatrixXd abs_zeta_mhz;           // rows: g12, columns: delta1c
  std::vector<double> argmin_g12_mhz;     // per column
  std::vector<double> zero_geff_g12_mhz;  // g12 with g_eff = 0, per column
  std::vector<bool> within_cell;
  double fraction_within = 0.0;
};
LocusResult residual_zz_locus(const LocusOptions& options);
// g12 (MHz) that cancels the coupler-mediated exchange at the given detuning.
double zero_geff_g12_mhz(const FixedCouplingParams& p, double delta1c_mhz);

// ----------------------------------------------------------- parabola law

struct ParabolaFit {
  double delta12_mhz = 0.0;
  double delta1c_mhz = 0.0;
  double nu = 0.0;
  std::vector<double> g_eff_mhz;
  std::vector<double> zeta_mhz;
  std::array<double, 3> coeffs{};  // zeta = c0 + c1 g + c2 g^2 (MHz)
  double r_squared = 0.0;
};

struct ParabolaOptions {
  std::vector<double> delta12_mhz{100.0, 150.0, 200.0, 400.0, 600.0, 800.0};
  double nu = 2.5e-3;
  double g_span_mhz = 8.0;  // g_eff sampled over alpha_q nu +- span
  std::size_t samples = 41;
  Truncation truncation{5, 5};
  FixedCouplingParams base{};
};

struct ParabolaResult {
  std::vector<ParabolaFit> fits;
  double predicted_g_mhz = 0.0;  // alpha_q nu
  double predicted_zeta_mhz = 0.0;  // 4 (2 alpha_c + alpha_q) nu^2
  double common_g_mhz = 0.0;     // median pairwise intersection of the fits
  double common_zeta_mhz = 0.0;
};
// Fixed nu per detuning: the coupler bias is chosen so that every detuning
// shares the same nu, and g_eff is scanned through g12.
ParabolaResult parabola_law(const ParabolaOptions& options = {});

// Sweep of the coupler bias at fixed g12 (the nu of each point differs).
struct BiasSweepParabola {
  double delta12_mhz = 0.0;
  std::vector<double> omega_c_ghz;
  std::vector<double> g_eff_mhz;
  std::vector<double> zeta_mhz;
  std::vector<double> nu;
};
BiasSweepParabola parabola_bias_sweep(const FixedCouplingParams& p, const std::vector<double>& omega_c_ghz,
                                      Truncation t = {5, 5});

// ------------------------------------------------------ perturbation grid

struct PerturbationRow {
  double omega_c_ghz;
  double g12_mhz;
  double nu;
  double zeta_exact_mhz;
  double zeta_generic_mhz;
  double zeta_simplified_mhz;
  bool dispersive;  // |Delta_ic| >= 8 g_ic
};
std::vector<PerturbationRow> perturbation_grid(const FixedCouplingParams& base, const std::vector<double>& omega_c_ghz,
                                               const std::vector<double>& g12_mhz, Truncation t = {4, 4});

// Printed second-order term (direct coupling only), rad/ns.
double zeta2_direct_closed_form(double omega1, double omega2, double alpha1, double alpha2, double g12);

// ------------------------------------------------------- two-level check

struct NullTest {
  double omega_c_ghz = 0.0;
  double zeta_two_level_mhz = 0.0;
  double zeta_full_mhz = 0.0;
  double ratio = 0.0;
};
NullTest two_level_null_test(const CircuitSpec& spec, double omega_c_ghz);

// ------------------------------------------------------------------ gates

struct GateTimeRow {
  double tg_ns = 0.0;
  PulseKind kind = PulseKind::awp;
  int m_max = 1;
  GateResult result;
};
std::vector<GateTimeRow> gate_time_sweep(const CircuitModel& model, const std::vector<double>& tg_ns,
                                         const std::vector<std::pair<PulseKind, int>>& shapes,
                                         const GateOptions& options);

// Parameter deviation applied to a three-mode circuit: omega1, omega2,
// alpha1, alpha2, alphac take MHz; rho1c, rho2c, rho12 take a relative change.
struct Deviation {
  std::string parameter;
  double delta = 0.0;
};
Deviation parse_deviation(const std::string& text);  // "omega1,+10MHz", "rho12,-10%"
CircuitSpec apply_deviation(const CircuitSpec& spec, const Deviation& d);
std::vector<Deviation> standard_deviations();

struct RobustnessRow {
  Deviation deviation;
  GateResult result;
};
// The adiabatic table comes from the nominal circuit, the gate is optimized
// and simulated on the deviated one.
std::vector<RobustnessRow> robustness_scan(const CircuitSpec& nominal, double tg_ns,
                                           const std::vector<Deviation>& deviations, const GateOptions& options);

struct DistortionRow {
  std::string configuration;
  double r = 0.0;
  double delay_ns = 0.0;
  double epg = 0.0;
  double zeta_idle_khz = 0.0;
};
std::vector<DistortionRow> distortion_scan(const std::vector<std::pair<std::string, CircuitSpec>>& configurations,
                                           double tg_ns, const std::vector<double>& r_values, double delay_ns,
                                           const GateOptions& options);
std::vector<std::pair<std::string, CircuitSpec>> distortion_configurations();

// State-averaged error when the coupler starts in |1> and the Z corrections
// of the ordinary calibration are applied.
double coupler_excited_error(const CircuitModel& model, const PulseShape& pulse, double idle_ghz);

// ------------------------------------------------------------- design map

struct DesignPoint {
  double delta12_mhz = 0.0;
  double alphac_mhz = 0.0;
  double idle_ghz = 0.0;
  double epg = 0.0;
  std::string error;  // empty on success
};
DesignPoint design_point(double delta12_mhz, double alphac_mhz, double tg_ns, const GateOptions& options,
                         Truncation t = {4, 4});

struct IndicatorMap {
  std::vector<double> alphac_mhz;
  std::vector<double> omega_c_ghz;
  Eigen::MatrixXd abs_zeta_mhz;  // rows: alpha_c, columns: omega_c
  Eigen::MatrixXd d_star;        // running maximum from idle
};
IndicatorMap indicator_map(double delta12_mhz, const std::vector<double>& alphac_mhz,
                           const std::vector<double>& omega_c_ghz, double idle_ghz, Truncation t = {4, 4});

// ------------------------------------------------------------------ stray

enum class StrayKind { none, qubit_qubit, coupler_coupler, qubit_coupler };
std::string to_string(StrayKind k);
StrayKind stray_kind_from_string(const std::string& name);

struct FiveModeOptions {
  double omega1_ghz = 6.0;
  double omega2_ghz = 5.4;
  double omega3_ghz = 6.1;
  double alpha_q_mhz = -250.0;
  double alpha_c_mhz = -300.0;
  double rho_qc = 0.018;
  double rho_qq = 0.0015;
  double idle_c1_ghz = 7.87;
  std::optional<double> idle_c2_ghz;  // defaults to the minimum-|zeta| bias of the (Q2, C2, Q3) triple
  Truncation truncation{3, 5};
};
// Modes (Q1, C1, Q2, C2, Q3); C1 is tunable. The stray coupling strength is
// the coupling at idle in MHz: Q1-Q3, C1-C2 or Q3-C1.
CircuitSpec five_mode_circuit(const FiveModeOptions& options, StrayKind kind, double stray_mhz);
double second_coupler_idle(const FiveModeOptions& options);

struct StrayRow {
  StrayKind kind = StrayKind::none;
  double stray_mhz = 0.0;
  double epg = 0.0;
  double leakage = 0.0;
  double unitarity_error = 0.0;
};
// CZ (x) I on (Q1, Q2) with the pulse table of the isolated three-mode gate.
// The lambdas are optimized on the stray-free five-mode circuit (starting from
// the three-mode optimum); with `reoptimize` they are optimized again at every
// stray strength, otherwise that calibration is reused.
std::vector<StrayRow> stray_scan(const FiveModeOptions& options, const std::vector<StrayKind>& kinds,
                                 const std::vector<double>& stray_mhz, double tg_ns, const GateOptions& gate_options,
                                 bool reoptimize = true);

// ------------------------------------------------------------------ noise

NoiseSpec reference_noise();  // T1 20/10/20 us, A = (10 uPhi0)^2, sigma from the 1/f spectrum
NoiseSpec improved_noise();   // T1 1 ms everywhere, sigma 6 uPhi0

struct NoiseErrorRow {
  double tg_ns = 0.0;
  double coherent_epg = 0.0;
  RBErrorBreakdown reference;
  RBErrorBreakdown improved;
};
std::vector<NoiseErrorRow> noise_error_sweep(const CircuitModel& model, const std::vector<double>& tg_ns,
                                             const GateOptions& options, const NoiseSpec& reference,
                                             const NoiseSpec& improved);

// Calibrated single-component AWP (phase pi) without further optimization.
PulseShape calibrated_awp(const CircuitModel& model, double tg_ns, const GateOptions& options);

struct SensitivityComparison {
  std::vector<double> freq_hz;
  std::vector<double> unipolar_f11_sq;  // |F_11|^2 in (rad/Phi0)^2
  std::vector<double> netzero_f11_sq;
  double unipolar_zero = 0.0;  // |F_11(0)|^2
  double netzero_zero = 0.0;
};
// 40 ns unipolar pulse at 7.87 GHz against a Net-Zero pulse at the sweet spot.
SensitivityComparison netzero_comparison(const CircuitModel& model, double tg_ns, const GateOptions& options,
                                         std::size_t freq_points = 200);

// ---------------------------------------------------------------- schemes

struct SchemeCurve {
  std::string name;  // CAQ-D, CAQ-U, CBQ-U, CBQ-D
  double idle_ghz = 0.0;
  ZZCurve curve;
  double max_abs_zeta_mhz = 0.0;  // over the pulsing side of idle
};
CircuitSpec scheme_circuit(const std::string& name, Truncation t = {4, 4});
std::vector<SchemeCurve> scheme_curves(std::size_t samples = 241, Truncation t = {4, 4});

// ------------------------------------------------------------- registry

// Sweep-capable point functions over a base circuit and gate options.
struct RegistryContext {
  CircuitSpec circuit = gate_circuit();
  GateOptions gate;
  NoiseSpec noise = reference_noise();
  double tg_ns = 30.0;
};
ExperimentRegistry default_registry(const RegistryContext& context);

}  // namespace czpulse
