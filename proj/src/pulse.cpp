#include "czpulse/pulse.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "czpulse/errors.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

std::size_t step_count(double duration_ns, double dt_ns) {
  if (!(duration_ns > 0.0)) throw DomainError("pulse duration must be positive");
  if (!(dt_ns > 0.0) || dt_ns > 0.05) throw DomainError("pulse sample step must lie in (0, 0.05] ns");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration_ns / dt_ns)));
}

}  // namespace

struct AdiabaticTable::Interp {
  Spline log_d;
  Spline zeta;
};

std::string to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::constant: return "constant";
    case PulseKind::awp: return "awp";
    case PulseKind::fourier: return "fourier";
    case PulseKind::netzero: return "netzero";
  }
  return "unknown";
}

PulseKind pulse_kind_from_string(const std::string& name) {
  if (name == "awp") return PulseKind::awp;
  if (name == "fourier") return PulseKind::fourier;
  if (name == "netzero") return PulseKind::netzero;
  if (name == "constant") return PulseKind::constant;
  throw ConfigError("unknown pulse kind '" + name + "' (expected awp, fourier, netzero or constant)");
}

double PulseShape::value_at(double t_ns) const {
  if (omega_c_ghz.empty()) throw DomainError("empty pulse");
  if (t_ns <= 0.0) return omega_c_ghz.front();
  const double x = t_ns / dt_ns;
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= omega_c_ghz.size()) return omega_c_ghz.back();
  const double f = x - static_cast<double>(k);
  return omega_c_ghz[k] + f * (omega_c_ghz[k + 1] - omega_c_ghz[k]);
}

PulseShape constant_pulse(double duration_ns, double omega_ghz, double dt_ns) {
  const std::size_t n = step_count(duration_ns, dt_ns);
  PulseShape p;
  p.kind = PulseKind::constant;
  p.nominal_gate_time_ns = duration_ns;
  p.dt_ns = duration_ns / static_cast<double>(n);
  p.idle_ghz = omega_ghz;
  p.omega_c_ghz.assign(n + 1, omega_ghz);
  return p;
}

AdiabaticTable::AdiabaticTable(std::vector<double> omega_ghz, std::vector<double> d, std::vector<double> zeta,
                               std::vector<bool> divergent)
    : omega_(std::move(omega_ghz)), d_(std::move(d)), zeta_(std::move(zeta)), divergent_(std::move(divergent)) {
  const std::size_t n = omega_.size();
  if (n < 4 || d_.size() != n || zeta_.size() != n || divergent_.size() != n) {
    throw DomainError("adiabatic table needs at least 4 consistent samples");
  }
  const double h = (omega_.back() - omega_.front()) / static_cast<double>(n - 1);
  std::vector<double> log_d(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(d_[k] > 0.0)) {
      throw DomainError("D-factor vanishes at " + std::to_string(omega_[k]) + " GHz; adiabatic weighting undefined");
    }
    log_d[k] = std::log(d_[k]);
  }
  auto interp = std::make_shared<Interp>(Interp{Spline(log_d.begin(), log_d.end(), omega_.front(), h),
                                                Spline(zeta_.begin(), zeta_.end(), omega_.front(), h)});
  interp_ = std::move(interp);
}

bool AdiabaticTable::contains(double omega_ghz) const {
  return !omega_.empty() && omega_ghz >= omega_.front() - 1e-12 && omega_ghz <= omega_.back() + 1e-12;
}

double AdiabaticTable::d_at(double omega_ghz) const {
  if (!contains(omega_ghz)) {
    std::ostringstream os;
    os << "coupler frequency " << omega_ghz << " GHz leaves the D table [" << lo_ghz() << ", " << hi_ghz() << "]";
    throw DomainError(os.str());
  }
  return std::exp(interp_->log_d(std::clamp(omega_ghz, lo_ghz(), hi_ghz())));
}

double AdiabaticTable::zeta_at(double omega_ghz) const {
  if (!contains(omega_ghz)) {
    std::ostringstream os;
    os << "coupler frequency " << omega_ghz << " GHz leaves the ZZ table [" << lo_ghz() << ", " << hi_ghz() << "]";
    throw DomainError(os.str());
  }
  return interp_->zeta(std::clamp(omega_ghz, lo_ghz(), hi_ghz()));
}

bool AdiabaticTable::divergent_near(double omega_ghz) const {
  if (!contains(omega_ghz)) return false;
  const double h = (hi_ghz() - lo_ghz()) / static_cast<double>(omega_.size() - 1);
  const auto k = std::min(omega_.size() - 2, static_cast<std::size_t>((omega_ghz - lo_ghz()) / h));
  return divergent_[k] || divergent_[k + 1];
}

TableOptions default_table_range(const CircuitSpec& spec, double idle_ghz) {
  double qmax = 0.0;
  for (int q : spec.qubit_indices) {
    if (q != spec.coupler_index) qmax = std::max(qmax, spec.modes[q].frequency_ghz);
  }
  TableOptions opt;
  if (idle_ghz > qmax) {
    opt.lo_ghz = idle_ghz - 2.5;
    opt.hi_ghz = idle_ghz + 0.3;
  } else {
    opt.lo_ghz = idle_ghz - 0.3;
    opt.hi_ghz = idle_ghz + 2.5;
  }
  opt.lo_ghz = std::max(opt.lo_ghz, kMinCouplerGhz);
  opt.hi_ghz = std::min(opt.hi_ghz, kMaxCouplerGhz);
  return opt;
}

AdiabaticTable build_adiabatic_table(const CircuitModel& model, double idle_ghz, const TableOptions& options) {
  if (options.points < 500) throw DomainError("adiabatic table needs at least 500 points");
  if (!(options.hi_ghz > options.lo_ghz)) throw DomainError("adiabatic table range is empty");
  if (idle_ghz < options.lo_ghz || idle_ghz > options.hi_ghz) {
    throw DomainError("idle frequency lies outside the adiabatic table range");
  }
  TrackingOptions topt;
  topt.anchor_ghz = idle_ghz;
  const auto grid = linspace(options.lo_ghz, options.hi_ghz, options.points);
  const SpectrumGrid sg = track_adiabatic(model, grid, computational_labels(model.spec()), topt);
  std::vector<double> zeta = sg.zeta;
  if (zeta.empty()) zeta.assign(grid.size(), 0.0);
  return AdiabaticTable(grid, sg.d_factor, zeta, sg.d_divergent);
}

PulseShape awp_generate(const AdiabaticTable& table, double gate_time_ns, const std::vector<double>& lambdas,
                        double idle_ghz, double dt_ns) {
  const std::size_t n = step_count(gate_time_ns, dt_ns);
  const double dt = gate_time_ns / static_cast<double>(n);
  PulseShape p;
  p.kind = PulseKind::awp;
  p.nominal_gate_time_ns = gate_time_ns;
  p.dt_ns = dt;
  p.lambdas = lambdas;
  p.idle_ghz = idle_ghz;
  p.omega_c_ghz.resize(n + 1);
  p.omega_c_ghz[0] = idle_ghz;

  const double tg = gate_time_ns;
  auto drive = [&](double t) {
    double s = 0.0;
    for (std::size_t m = 0; m < lambdas.size(); ++m) {
      s += lambdas[m] * std::sin(kTwoPi * static_cast<double>(m + 1) * t / tg);
    }
    return s;
  };
  // State in rad/ns; D lookup in GHz.
  auto rhs = [&](double t, double w) {
    const double ghz = rad_to_ghz(w);
    if (table.divergent_near(ghz)) {
      throw NumericalError("AWP trajectory meets a near-degenerate point at " + std::to_string(ghz) + " GHz");
    }
    return drive(t) / table.d_at(ghz);
  };

  constexpr int kSub = 4;
  const double h = dt / kSub;
  double w = ghz_to_rad(idle_ghz);
  for (std::size_t k = 0; k < n; ++k) {
    for (int j = 0; j < kSub; ++j) {
      const double t = static_cast<double>(k) * dt + j * h;
      const double k1 = rhs(t, w);
      const double k2 = rhs(t + 0.5 * h, w + 0.5 * h * k1);
      const double k3 = rhs(t + 0.5 * h, w + 0.5 * h * k2);
      const double k4 = rhs(t + h, w + h * k3);
      w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    p.omega_c_ghz[k + 1] = rad_to_ghz(w);
  }
  const double miss = std::abs(p.omega_c_ghz.back() - idle_ghz);
  if (miss > 1e-6) {
    std::ostringstream os;
    os << "AWP waveform misses idle by " << miss * 1e6 << " kHz at the end of the gate";
    throw NumericalError(os.str());
  }
  return p;
}

PulseShape fourier_generate(double gate_time_ns, const std::vector<double>& lambdas, double idle_ghz, double dt_ns) {
  const std::size_t n = step_count(gate_time_ns, dt_ns);
  const double dt = gate_time_ns / static_cast<double>(n);
  PulseShape p;
  p.kind = PulseKind::fourier;
  p.nominal_gate_time_ns = gate_time_ns;
  p.dt_ns = dt;
  p.lambdas = lambdas;
  p.idle_ghz = idle_ghz;
  p.omega_c_ghz.resize(n + 1);
  const double tg = gate_time_ns;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    double dw = 0.0;
    for (std::size_t m = 0; m < lambdas.size(); ++m) {
      const double mm = static_cast<double>(m + 1);
      dw += lambdas[m] * tg / (kTwoPi * mm) * (1.0 - std::cos(kTwoPi * mm * t / tg));
    }
    p.omega_c_ghz[k] = idle_ghz + rad_to_ghz(dw);
  }
  p.omega_c_ghz.front() = idle_ghz;
  p.omega_c_ghz.back() = idle_ghz;
  return p;
}

PulseShape netzero(const CircuitSpec& spec, const AdiabaticTable& table, double half_gate_time_ns,
                   const std::vector<double>& lambdas, double idle_ghz, double dt_ns) {
  if (!spec.flux_map) throw ConfigError("Net-Zero pulses need a flux map");
  const FluxMapSpec& map = *spec.flux_map;
  if (std::abs(idle_ghz - map.omega_max_ghz) > 1e-9) {
    throw DomainError("Net-Zero pulses must idle at the flux sweet spot");
  }
  const PulseShape half = awp_generate(table, half_gate_time_ns, lambdas, idle_ghz, dt_ns);
  const std::size_t n = half.samples() - 1;
  PulseShape p = half;
  p.kind = PulseKind::netzero;
  p.nominal_gate_time_ns = 2.0 * half_gate_time_ns;
  p.omega_c_ghz.resize(2 * n + 1);
  p.flux_phi0.resize(2 * n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double w = std::min(half.omega_c_ghz[k], map.omega_max_ghz);
    const double phi = frequency_to_flux(map, w);
    p.flux_phi0[k] = phi;
    p.flux_phi0[n + k] = -phi;
  }
  p.flux_phi0[0] = 0.0;
  p.flux_phi0[n] = 0.0;
  p.flux_phi0[2 * n] = 0.0;
  for (std::size_t k = 0; k <= 2 * n; ++k) {
    p.omega_c_ghz[k] = flux_to_frequency(map, p.flux_phi0[k]).omega_c_ghz;
  }
  return p;
}

double gaussian_sigma_ns(double cutoff_mhz) {
  if (!(cutoff_mhz > 0.0)) throw DomainError("filter cutoff must be positive");
  return std::sqrt(std::log(2.0)) / (kTwoPi * cutoff_mhz * 1e-3);
}

namespace {

std::vector<double> gaussian_kernel(double sigma_ns, double dt_ns) {
  const auto half = static_cast<std::size_t>(std::ceil(6.0 * sigma_ns / dt_ns));
  std::vector<double> w(2 * half + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double t = (static_cast<double>(k) - static_cast<double>(half)) * dt_ns;
    w[k] = std::exp(-0.5 * t * t / (sigma_ns * sigma_ns));
    sum += w[k];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace

double filter_transfer(double cutoff_mhz, double freq_mhz, double dt_ns) {
  const auto w = gaussian_kernel(gaussian_sigma_ns(cutoff_mhz), dt_ns);
  const auto half = static_cast<double>(w.size() / 2);
  double re = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    re += w[k] * std::cos(kTwoPi * freq_mhz * 1e-3 * (static_cast<double>(k) - half) * dt_ns);
  }
  return std::abs(re);
}

PulseShape apply_filter(const PulseShape& pulse, double cutoff_mhz) {
  const double sigma = gaussian_sigma_ns(cutoff_mhz);
  const auto kernel = gaussian_kernel(sigma, pulse.dt_ns);
  const std::size_t half = kernel.size() / 2;
  const std::size_t n = pulse.samples();
  const std::size_t pad = half;
  std::vector<double> padded(n + 2 * pad, 0.0);
  for (std::size_t k = 0; k < n; ++k) padded[pad + k] = pulse.omega_c_ghz[k] - pulse.idle_ghz;
  std::vector<double> out(padded.size(), 0.0);
  for (std::size_t k = 0; k < padded.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      const auto src = static_cast<std::ptrdiff_t>(k + j) - static_cast<std::ptrdiff_t>(half);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(padded.size())) continue;
      acc += kernel[j] * padded[static_cast<std::size_t>(src)];
    }
    out[k] = pulse.idle_ghz + acc;
  }
  if (std::abs(out.front() - pulse.idle_ghz) > 1e-6 || std::abs(out.back() - pulse.idle_ghz) > 1e-6) {
    throw NumericalError("filtered waveform does not settle at idle");
  }
  out.front() = pulse.idle_ghz;
  out.back() = pulse.idle_ghz;

  PulseShape p = pulse;
  p.omega_c_ghz = std::move(out);
  p.flux_phi0.clear();
  p.filter_mhz = cutoff_mhz;
  p.over_filtered = cutoff_mhz * 1e-3 < 10.0 / pulse.nominal_gate_time_ns;
  return p;
}

PulseShape apply_distortion(const PulseShape& pulse, double r, double delay_ns) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("reflection amplitude must satisfy 0 <= r < 1");
  if (!(delay_ns >= 0.0) || delay_ns >= pulse.duration_ns()) {
    throw DomainError("reflection delay must be non-negative and shorter than the pulse");
  }
  PulseShape p = pulse;
  p.distortion = Distortion{r, delay_ns};
  if (r == 0.0) return p;
  const auto shift = static_cast<std::size_t>(std::llround(delay_ns / pulse.dt_ns));
  const std::size_t n = pulse.samples();
  p.omega_c_ghz.assign(n + shift, pulse.idle_ghz);
  for (std::size_t k = 0; k < n + shift; ++k) {
    double dw = 0.0;
    if (k < n) dw += pulse.omega_c_ghz[k] - pulse.idle_ghz;
    if (k >= shift && k - shift < n) dw += r * (pulse.omega_c_ghz[k - shift] - pulse.idle_ghz);
    p.omega_c_ghz[k] = pulse.idle_ghz + dw;
  }
  p.omega_c_ghz.back() = pulse.idle_ghz;
  p.flux_phi0.clear();
  return p;
}

double integrated_zz_phase(const AdiabaticTable& table, const PulseShape& pulse) {
  const std::size_t n = pulse.samples();
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    acc += w * table.zeta_at(pulse.omega_c_ghz[k]);
  }
  return acc * pulse.dt_ns;
}

Calibration calibrate_conditional_phase(const AdiabaticTable& table, const PulseFamily& family,
                                        const std::vector<double>& base_lambdas, double target_phase,
                                        double tolerance) {
  auto scaled = [&](double s) {
    std::vector<double> l = base_lambdas;
    for (double& x : l) x *= s;
    return l;
  };
  auto phase_of = [&](double s, PulseShape* keep) {
    PulseShape p = family(scaled(s));
    const double ph = integrated_zz_phase(table, p);
    if (keep) *keep = std::move(p);
    return ph;
  };
  Calibration cal;
  if (target_phase == 0.0) {
    cal.lambdas = scaled(0.0);
    cal.pulse = family(cal.lambdas);
    cal.phase = integrated_zz_phase(table, cal.pulse);
    return cal;
  }

  // Probe the sign of the accessible phase with a reachable scale.
  double s_probe = 1.0;
  double ph_probe = 0.0;
  for (int tries = 0;; ++tries) {
    try {
      ph_probe = phase_of(s_probe, nullptr);
      break;
    } catch (const DomainError&) {
      if (tries > 40) throw CalibrationError("no reachable pulse amplitude for calibration");
      s_probe *= 0.5;
    }
  }
  if (ph_probe == 0.0) throw CalibrationError("pulse family accumulates no conditional phase");
  const double sgn = ph_probe > 0.0 ? 1.0 : -1.0;
  double goal = std::fmod(target_phase, kTwoPi);
  if (goal * sgn <= 0.0) goal += sgn * kTwoPi;
  const double mag = std::abs(goal);

  double lo = 0.0;
  double hi = s_probe;
  double ph_hi = ph_probe;
  while (std::abs(ph_hi) < mag) {
    lo = hi;
    hi *= 1.5;
    try {
      ph_hi = phase_of(hi, nullptr);
    } catch (const DomainError& e) {
      throw CalibrationError(std::string("target phase unreachable within the table range: ") + e.what());
    }
    if (hi > 1e12) throw CalibrationError("target phase unreachable");
  }
  PulseShape best;
  double mid = hi;
  double ph = ph_hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    ph = phase_of(mid, &best);
    if (std::abs(ph - goal) < tolerance) break;
    if (std::abs(ph) < mag) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(ph - goal) >= tolerance) throw CalibrationError("phase calibration did not converge");
  cal.scale = mid;
  cal.lambdas = scaled(mid);
  cal.phase = ph;
  cal.pulse = std::move(best);
  return cal;
}

}  // namespace czpulse
