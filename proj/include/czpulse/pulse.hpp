#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "czpulse/model.hpp"

namespace czpulse {

enum class PulseKind { constant, awp, fourier, netzero };

std::string to_string(PulseKind kind);
PulseKind pulse_kind_from_string(const std::string& name);

struct Distortion {
  double r = 0.0;
  double delay_ns = 0.0;
};

// Uniformly sampled coupler waveform omega_c(t) in GHz with t_0 = 0.
struct PulseShape {
  PulseKind kind = PulseKind::constant;
  double nominal_gate_time_ns = 0.0;  // T_g before any padding or tail extension
  double dt_ns = 0.01;
  std::vector<double> omega_c_ghz;
  std::vector<double> flux_phi0;  // filled for flux-generated pulses only
  std::vector<double> lambdas;
  double idle_ghz = 0.0;
  std::optional<double> filter_mhz;
  std::optional<Distortion> distortion;
  bool over_filtered = false;

  std::size_t samples() const { return omega_c_ghz.size(); }
  double duration_ns() const { return dt_ns * static_cast<double>(samples() - 1); }
  double time_ns(std::size_t k) const { return dt_ns * static_cast<double>(k); }
  // Linear interpolation between samples; constant continuation outside.
  double value_at(double t_ns) const;
};

PulseShape constant_pulse(double duration_ns, double omega_ghz, double dt_ns = 0.01);

// D(omega_c) and zeta(omega_c) along the computational adiabatic states on a
// uniform grid, with smooth interpolants (cubic B-splines of log D and zeta).
class AdiabaticTable {
 public:
  AdiabaticTable() = default;
  AdiabaticTable(std::vector<double> omega_ghz, std::vector<double> d, std::vector<double> zeta,
                 std::vector<bool> divergent);

  double lo_ghz() const { return omega_.front(); }
  double hi_ghz() const { return omega_.back(); }
  bool contains(double omega_ghz) const;
  const std::vector<double>& omega_ghz() const { return omega_; }
  const std::vector<double>& d_values() const { return d_; }
  const std::vector<double>& zeta_values() const { return zeta_; }

  double d_at(double omega_ghz) const;     // throws DomainError outside the table
  double zeta_at(double omega_ghz) const;  // rad/ns
  // True when a flagged (near-degenerate) sample brackets omega.
  bool divergent_near(double omega_ghz) const;

 private:
  struct Interp;
  std::vector<double> omega_;
  std::vector<double> d_;
  std::vector<double> zeta_;
  std::vector<bool> divergent_;
  std::shared_ptr<const Interp> interp_;
};

struct TableOptions {
  double lo_ghz = 0.0;
  double hi_ghz = 0.0;
  std::size_t points = 600;
};

// Default span: 2.5 GHz on the pulsing side of idle, 0.3 GHz on the other.
TableOptions default_table_range(const CircuitSpec& spec, double idle_ghz);

AdiabaticTable build_adiabatic_table(const CircuitModel& model, double idle_ghz, const TableOptions& options);

// dw/dt = (1/D(w)) sum_m lambda_m sin(2 pi m t / T), classic RK4 at the sample step.
PulseShape awp_generate(const AdiabaticTable& table, double gate_time_ns, const std::vector<double>& lambdas,
                        double idle_ghz, double dt_ns = 0.01);

// Same ODE with D = 1, evaluated in closed form.
PulseShape fourier_generate(double gate_time_ns, const std::vector<double>& lambdas, double idle_ghz,
                            double dt_ns = 0.01);

// Unipolar AWP flux segment followed by its flux-negated copy. Idle must be
// the sweet spot of the flux map.
PulseShape netzero(const CircuitSpec& spec, const AdiabaticTable& table, double half_gate_time_ns,
                   const std::vector<double>& lambdas, double idle_ghz, double dt_ns = 0.01);

// Gaussian low-pass with -3 dB point at `cutoff_mhz`; the waveform is padded
// with idle so that the filtered tails settle back to idle.
PulseShape apply_filter(const PulseShape& pulse, double cutoff_mhz);

// sigma_t of the Gaussian kernel, ns.
double gaussian_sigma_ns(double cutoff_mhz);
// Magnitude of the sampled, normalized kernel's transfer function at `freq_mhz`.
double filter_transfer(double cutoff_mhz, double freq_mhz, double dt_ns);

PulseShape apply_distortion(const PulseShape& pulse, double r, double delay_ns);

// Conditional phase accumulated along the pulse, integral of zeta dt (rad).
double integrated_zz_phase(const AdiabaticTable& table, const PulseShape& pulse);

struct Calibration {
  double scale = 0.0;
  std::vector<double> lambdas;
  double phase = 0.0;
  PulseShape pulse;
};

// Bisection on the overall lambda scale so that the integrated ZZ phase hits
// `target_phase` modulo 2 pi. `family` maps lambdas to a waveform.
using PulseFamily = std::function<PulseShape(const std::vector<double>&)>;
Calibration calibrate_conditional_phase(const AdiabaticTable& table, const PulseFamily& family,
                                        const std::vector<double>& base_lambdas, double target_phase,
                                        double tolerance = 1e-5);

}  // namespace czpulse
