#include "czpulse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "czpulse/errors.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

namespace {

constexpr double kMicro = 1e-6;
constexpr double kNsPerS = 1e9;

double hz_from_rad_per_ns(double w) { return w / kTwoPi * kNsPerS; }

void require_flux_map(const CircuitModel& model, const char* what) {
  if (!model.spec().flux_map) {
    throw ConfigError(std::string(what) + " needs a flux map for the tunable mode");
  }
}

// Coupler frequency slope on the positive flux branch, GHz per Phi0.
double flux_slope_ghz(const CircuitModel& model, double omega_c_ghz) {
  if (!model.spec().flux_map) return 0.0;
  const auto& map = *model.spec().flux_map;
  const double phi = frequency_to_flux(map, omega_c_ghz);
  return flux_to_frequency(map, phi).domega_dphi_ghz;
}

std::vector<Eigen::Index> match_columns(const Eigensystem& es, const Eigen::MatrixXd& tracked) {
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(tracked.cols()));
  for (Eigen::Index c = 0; c < tracked.cols(); ++c) {
    Eigen::Index best = 0;
    (es.vectors.transpose() * tracked.col(c)).cwiseAbs().maxCoeff(&best);
    cols[static_cast<std::size_t>(c)] = best;
  }
  return cols;
}

Occupation dominant_label(const FockBasis& basis, const Eigensystem& es, Eigen::Index col) {
  Eigen::Index row = 0;
  es.vectors.col(col).cwiseAbs().maxCoeff(&row);
  return basis.occupation(static_cast<std::size_t>(row));
}

int computational_index(const std::vector<Eigen::Index>& cols, Eigen::Index k) {
  for (std::size_t s = 0; s < cols.size(); ++s) {
    if (cols[s] == k) return static_cast<int>(s);
  }
  return -1;
}

struct Context {
  const CircuitModel& model;
  const NoiseSpec& noise;
  std::vector<Eigen::MatrixXd> position;  // per relaxing mode
  std::vector<double> inv_t1_ns;
  Eigen::MatrixXd two_nc;
};

Context make_context(const CircuitModel& model, const NoiseSpec& noise) {
  noise.validate(model.spec().modes.size());
  if (noise.flux_a_uphi0sq > 0.0) require_flux_map(model, "1/f flux noise");
  if (noise.sigma_uphi0 > 0.0) require_flux_map(model, "quasistatic flux noise");
  if (noise.white_psd_uphi0sq_hz > 0.0) require_flux_map(model, "white flux noise");
  if (computational_labels(model.spec()).size() != 4) {
    throw DomainError("noise error model needs exactly two qubits");
  }
  Context ctx{model, noise, {}, {}, 2.0 * model.number_operator(model.spec().coupler_index)};
  for (std::size_t i = 0; i < noise.t1_us.size(); ++i) {
    if (noise.t1_us[i] > 0.0) {
      ctx.position.push_back(model.position_operator(static_cast<int>(i)));
      ctx.inv_t1_ns.push_back(1.0 / (noise.t1_us[i] * 1e3));
    }
  }
  return ctx;
}

void add_transverse(const Context& ctx, const Eigensystem& es, const std::vector<Eigen::Index>& cols,
                    std::vector<TransitionRate>& out) {
  if (ctx.position.empty()) return;
  const Eigen::Index dim = es.values.size();
  for (std::size_t s = 0; s < cols.size(); ++s) {
    const Eigen::VectorXd vs = es.vectors.col(cols[s]);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < ctx.position.size(); ++i) {
      const Eigen::VectorXd m = es.vectors.transpose() * (ctx.position[i] * vs);
      total += m.cwiseAbs2() * ctx.inv_t1_ns[i];
    }
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double gap = es.values(cols[s]) - es.values(k);
      if (k == cols[s] || gap <= 0.0 || total(k) <= 0.0) continue;
      TransitionRate r;
      r.source = static_cast<int>(s);
      r.target = computational_index(cols, k);
      r.target_label = dominant_label(ctx.model.basis(), es, k);
      r.mechanism = Mechanism::transverse;
      r.rate = total(k);
      r.gap_ghz = rad_to_ghz(gap);
      out.push_back(std::move(r));
    }
  }
}

void add_longitudinal(const Context& ctx, double omega_c_ghz, const Eigensystem& es,
                      const std::vector<Eigen::Index>& cols, std::vector<TransitionRate>& out) {
  if (ctx.noise.flux_a_uphi0sq <= 0.0) return;
  const double slope = ghz_to_rad(flux_slope_ghz(ctx.model, omega_c_ghz));
  const double a_phi = ctx.noise.flux_a_uphi0sq * kMicro * kMicro;
  const Eigen::Index dim = es.values.size();
  for (std::size_t s = 0; s < cols.size(); ++s) {
    const Eigen::VectorXd m = es.vectors.transpose() * (ctx.two_nc * es.vectors.col(cols[s]));
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double gap = es.values(cols[s]) - es.values(k);
      if (k == cols[s] || gap <= 0.0) continue;
      const double m2 = m(k) * m(k);
      if (m2 <= 0.0) continue;
      double f = hz_from_rad_per_ns(gap);
      bool clamped = false;
      if (f < ctx.noise.f_ir_hz) {
        f = ctx.noise.f_ir_hz;
        clamped = true;
      }
      const double psd = slope * slope * a_phi / f * kNsPerS;
      TransitionRate r;
      r.source = static_cast<int>(s);
      r.target = computational_index(cols, k);
      r.target_label = dominant_label(ctx.model.basis(), es, k);
      r.mechanism = Mechanism::longitudinal;
      r.rate = 0.5 * m2 * psd;
      r.gap_ghz = rad_to_ghz(gap);
      r.clamped = clamped;
      out.push_back(std::move(r));
    }
  }
}

std::array<double, 3> relative_slopes(const CircuitModel& model, double omega_c_ghz, const Eigensystem& es,
                                      const std::vector<Eigen::Index>& cols) {
  const Eigen::MatrixXd dh = model.coupler_derivative(omega_c_ghz);
  std::array<double, 4> raw{};
  for (std::size_t s = 0; s < 4; ++s) {
    const Eigen::VectorXd v = es.vectors.col(cols[s]);
    raw[s] = v.dot(dh * v);
  }
  return {raw[1] - raw[0], raw[2] - raw[0], raw[3] - raw[0]};
}

RatePoint make_point(const Context& ctx, double omega_c_ghz, const Eigensystem& es,
                     const std::vector<Eigen::Index>& cols) {
  RatePoint p;
  p.omega_c_ghz = omega_c_ghz;
  add_transverse(ctx, es, cols, p.transitions);
  add_longitudinal(ctx, omega_c_ghz, es, cols, p.transitions);
  for (const auto& r : p.transitions) {
    if (r.target >= 0) {
      p.intra[r.source][r.target] += r.rate;
      p.gamma_ss += r.rate;
    } else {
      p.leak[r.source] += r.rate;
      p.gamma_sl += r.rate;
    }
  }
  p.slope = relative_slopes(ctx.model, omega_c_ghz, es, cols);
  p.domega_dphi_ghz = flux_slope_ghz(ctx.model, omega_c_ghz);
  const double scale = ghz_to_rad(p.domega_dphi_ghz) * ctx.noise.sigma_uphi0 * kMicro / std::sqrt(2.0);
  for (int m = 0; m < 3; ++m) p.gamma_phi[m] = p.slope[m] * scale;
  return p;
}

RatePoint rates_at(const CircuitModel& model, const NoiseSpec& noise, double omega_c_ghz) {
  const Context ctx = make_context(model, noise);
  const auto labels = computational_labels(model.spec());
  const LabelledPoint lp = labelled_point(model, omega_c_ghz, labels);
  return make_point(ctx, omega_c_ghz, lp.eigensystem, lp.columns);
}

std::vector<TransitionRate> filter_mechanism(std::vector<TransitionRate> all, Mechanism m) {
  std::erase_if(all, [m](const TransitionRate& r) { return r.mechanism != m; });
  return all;
}

template <typename T, std::size_t N>
std::array<T, N> lerp(const std::array<T, N>& a, const std::array<T, N>& b, double w) {
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return out;
}

std::vector<double> trapezoid_weights(std::size_t n, double dt) {
  std::vector<double> w(n, dt);
  if (n == 1) {
    w[0] = 0.0;
  } else if (n > 1) {
    w.front() = 0.5 * dt;
    w.back() = 0.5 * dt;
  }
  return w;
}

std::array<double, 3> integrate_p(const std::vector<std::array<double, 3>>& p, double dt) {
  const auto w = trapezoid_weights(p.size(), dt);
  std::array<double, 3> s{};
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (int m = 0; m < 3; ++m) s[m] += w[k] * p[k][m];
  }
  return s;
}

}  // namespace

void NoiseSpec::validate(std::size_t modes) const {
  if (!t1_us.empty() && t1_us.size() != modes) {
    std::ostringstream os;
    os << "t1_us lists " << t1_us.size() << " values for " << modes << " modes";
    throw ConfigError(os.str());
  }
  for (double t : t1_us) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t1_us entries must be finite and non-negative");
  }
  if (!(flux_a_uphi0sq >= 0.0) || !(sigma_uphi0 >= 0.0) || !(white_psd_uphi0sq_hz >= 0.0)) {
    throw ConfigError("noise amplitudes must be non-negative");
  }
  if (!(f_ir_hz > 0.0) || !(f_uv_hz > f_ir_hz)) throw ConfigError("noise cutoffs need 0 < f_ir_hz < f_uv_hz");
}

double NoiseSpec::sigma_from_one_over_f() const {
  return std::sqrt(2.0 * flux_a_uphi0sq * std::log(f_uv_hz / f_ir_hz));
}

std::string to_string(Mechanism m) { return m == Mechanism::transverse ? "transverse" : "longitudinal"; }

std::vector<double> RateCurves::omega_c_ghz() const {
  std::vector<double> w;
  w.reserve(points.size());
  for (const auto& p : points) w.push_back(p.omega_c_ghz);
  return w;
}

RatePoint RateCurves::at(double omega) const {
  if (points.empty()) throw DomainError("empty rate curves");
  const double lo = points.front().omega_c_ghz;
  const double hi = points.back().omega_c_ghz;
  const double tol = 1e-9;
  if (omega < lo - tol || omega > hi + tol) {
    std::ostringstream os;
    os << "coupler frequency " << omega << " GHz outside the rate grid [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  if (points.size() == 1) return points.front();
  auto it = std::upper_bound(points.begin(), points.end(), omega,
                             [](double w, const RatePoint& p) { return w < p.omega_c_ghz; });
  std::size_t k = static_cast<std::size_t>(std::distance(points.begin(), it));
  k = std::clamp<std::size_t>(k, 1, points.size() - 1);
  const RatePoint& a = points[k - 1];
  const RatePoint& b = points[k];
  const double w = std::clamp((omega - a.omega_c_ghz) / (b.omega_c_ghz - a.omega_c_ghz), 0.0, 1.0);
  RatePoint r;
  r.omega_c_ghz = omega;
  r.transitions = w < 0.5 ? a.transitions : b.transitions;
  for (int s = 0; s < 4; ++s) r.intra[s] = lerp(a.intra[s], b.intra[s], w);
  r.leak = lerp(a.leak, b.leak, w);
  r.gamma_ss = (1.0 - w) * a.gamma_ss + w * b.gamma_ss;
  r.gamma_sl = (1.0 - w) * a.gamma_sl + w * b.gamma_sl;
  r.slope = lerp(a.slope, b.slope, w);
  r.domega_dphi_ghz = (1.0 - w) * a.domega_dphi_ghz + w * b.domega_dphi_ghz;
  r.gamma_phi = lerp(a.gamma_phi, b.gamma_phi, w);
  return r;
}

std::vector<TransitionRate> transverse_rates(const CircuitModel& model, const NoiseSpec& noise, double omega_c_ghz) {
  return filter_mechanism(rates_at(model, noise, omega_c_ghz).transitions, Mechanism::transverse);
}

std::vector<TransitionRate> longitudinal_rates(const CircuitModel& model, const NoiseSpec& noise,
                                               double omega_c_ghz) {
  if (noise.flux_a_uphi0sq > 0.0) require_flux_map(model, "1/f flux noise");
  return filter_mechanism(rates_at(model, noise, omega_c_ghz).transitions, Mechanism::longitudinal);
}

std::array<double, 3> dephasing_rates(const CircuitModel& model, const NoiseSpec& noise, double omega_c_ghz) {
  return rates_at(model, noise, omega_c_ghz).gamma_phi;
}

RateCurves rate_curves(const CircuitModel& model, const NoiseSpec& noise, const std::vector<double>& grid_ghz) {
  const Context ctx = make_context(model, noise);
  const auto labels = computational_labels(model.spec());
  TrackingOptions opt;
  opt.compute_d_factor = false;
  const SpectrumGrid grid = track_adiabatic(model, grid_ghz, labels, opt);
  RateCurves curves;
  curves.points.reserve(grid_ghz.size());
  for (std::size_t k = 0; k < grid_ghz.size(); ++k) {
    const Eigensystem es = diagonalize(model, grid_ghz[k]);
    curves.points.push_back(make_point(ctx, grid_ghz[k], es, match_columns(es, grid.tracked_vectors[k])));
  }
  return curves;
}

RateCurves rate_curves_for_pulse(const CircuitModel& model, const NoiseSpec& noise, const PulseShape& pulse,
                                 std::size_t points) {
  if (pulse.omega_c_ghz.empty()) throw DomainError("empty pulse");
  auto [mn, mx] = std::minmax_element(pulse.omega_c_ghz.begin(), pulse.omega_c_ghz.end());
  double lo = *mn;
  double hi = *mx;
  if (model.spec().idle_ghz) {
    lo = std::min(lo, *model.spec().idle_ghz);
    hi = std::max(hi, *model.spec().idle_ghz);
  }
  lo -= 1e-3;
  hi += 1e-3;
  if (model.spec().flux_map) hi = std::min(hi, model.spec().flux_map->omega_max_ghz);
  return rate_curves(model, noise, linspace(lo, hi, std::max<std::size_t>(points, 2)));
}

IntegratedTransitions integrate_transitions(const RateCurves& curves, const PulseShape& pulse) {
  IntegratedTransitions out;
  const auto w = trapezoid_weights(pulse.samples(), pulse.dt_ns);
  for (std::size_t k = 0; k < pulse.samples(); ++k) {
    const RatePoint p = curves.at(pulse.omega_c_ghz[k]);
    for (int s = 0; s < 4; ++s) {
      out.leak[s] += w[k] * p.leak[s];
      for (int t = 0; t < 4; ++t) out.intra[s][t] += w[k] * p.intra[s][t];
    }
    out.gamma_ss_tau += w[k] * p.gamma_ss;
    out.gamma_sl_tau += w[k] * p.gamma_sl;
  }
  return out;
}

std::string to_string(DephasingKind kind) {
  switch (kind) {
    case DephasingKind::quasistatic:
      return "quasistatic";
    case DephasingKind::one_over_f:
      return "one_over_f";
    case DephasingKind::white:
      return "white";
  }
  return "unknown";
}

DephasingKind dephasing_kind_from_string(const std::string& name) {
  if (name == "quasistatic") return DephasingKind::quasistatic;
  if (name == "one_over_f" || name == "1/f") return DephasingKind::one_over_f;
  if (name == "white") return DephasingKind::white;
  throw ConfigError("unknown dephasing kind '" + name + "' (expected quasistatic, one_over_f or white)");
}

std::vector<std::array<double, 3>> flux_sensitivity(const RateCurves& curves, const PulseShape& pulse) {
  const bool signed_flux = pulse.flux_phi0.size() == pulse.samples();
  std::vector<std::array<double, 3>> p(pulse.samples());
  for (std::size_t k = 0; k < pulse.samples(); ++k) {
    const RatePoint r = curves.at(pulse.omega_c_ghz[k]);
    double slope = ghz_to_rad(r.domega_dphi_ghz);
    if (signed_flux && pulse.flux_phi0[k] < 0.0) slope = -slope;
    for (int m = 0; m < 3; ++m) p[k][m] = r.slope[m] * slope;
  }
  return p;
}

std::array<std::complex<double>, 3> sensitivity_spectrum(const std::vector<std::array<double, 3>>& p, double dt_ns,
                                                         double freq_hz) {
  const double w = kTwoPi * freq_hz / kNsPerS;
  const auto wt = trapezoid_weights(p.size(), dt_ns);
  std::array<std::complex<double>, 3> f{};
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::complex<double> e = std::polar(wt[k], w * dt_ns * static_cast<double>(k));
    for (int m = 0; m < 3; ++m) f[m] += p[k][m] * e;
  }
  return f;
}

PhaseCovariance phase_covariance(const RateCurves& curves, const NoiseSpec& noise, const PulseShape& pulse,
                                 DephasingKind kind, std::size_t freq_points) {
  noise.validate(noise.t1_us.size());
  PhaseCovariance out;
  out.kind = kind;
  const auto p = flux_sensitivity(curves, pulse);
  switch (kind) {
    case DephasingKind::quasistatic: {
      const double sigma = noise.sigma_uphi0 * kMicro;
      const auto s = integrate_p(p, pulse.dt_ns);
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) out.matrix(m, n) = sigma * sigma * s[m] * s[n];
      break;
    }
    case DephasingKind::white: {
      const double a = noise.white_psd_uphi0sq_hz * kMicro * kMicro * kNsPerS;
      const auto w = trapezoid_weights(p.size(), pulse.dt_ns);
      for (std::size_t k = 0; k < p.size(); ++k)
        for (int m = 0; m < 3; ++m)
          for (int n = 0; n < 3; ++n) out.matrix(m, n) += a * w[k] * p[k][m] * p[k][n];
      break;
    }
    case DephasingKind::one_over_f: {
      if (freq_points < 2) throw ConfigError("1/f covariance needs at least two frequency points");
      const double a = noise.flux_a_uphi0sq * kMicro * kMicro;
      const double s0 = std::log(noise.f_ir_hz);
      const double s1 = std::log(noise.f_uv_hz);
      const double ds = (s1 - s0) / static_cast<double>(freq_points - 1);
      out.freq_hz.resize(freq_points);
      out.spectra.resize(freq_points);
      for (std::size_t j = 0; j < freq_points; ++j) {
        out.freq_hz[j] = std::exp(s0 + ds * static_cast<double>(j));
        out.spectra[j] = sensitivity_spectrum(p, pulse.dt_ns, out.freq_hz[j]);
        const double wj = (j == 0 || j + 1 == freq_points) ? 0.5 * ds : ds;
        for (int m = 0; m < 3; ++m)
          for (int n = 0; n < 3; ++n)
            out.matrix(m, n) += 2.0 * a * wj * std::real(out.spectra[j][m] * std::conj(out.spectra[j][n]));
      }
      break;
    }
  }
  return out;
}

Eigen::Matrix3d white_covariance_monte_carlo(const RateCurves& curves, const NoiseSpec& noise, const PulseShape& pulse,
                                             std::size_t realizations, std::uint64_t seed) {
  if (realizations < 2) throw ConfigError("Monte-Carlo covariance needs at least two realizations");
  const double a = noise.white_psd_uphi0sq_hz * kMicro * kMicro * kNsPerS;
  const auto p = flux_sensitivity(curves, pulse);
  const auto w = trapezoid_weights(p.size(), pulse.dt_ns);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (std::size_t r = 0; r < realizations; ++r) {
    Eigen::Vector3d phi = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (w[k] <= 0.0) continue;
      const double x = normal(rng) * std::sqrt(a / w[k]);
      for (int m = 0; m < 3; ++m) phi(m) += w[k] * p[k][m] * x;
    }
    acc += phi * phi.transpose();
  }
  return acc / static_cast<double>(realizations);
}

double transition_error(const IntegratedTransitions& t) {
  double leak = 0.0;
  double intra = 0.0;
  for (int s = 0; s < 4; ++s) {
    leak += t.leak[s];
    for (int u = 0; u < 4; ++u) intra += t.intra[s][u];
  }
  return leak / 4.0 + intra / 5.0;
}

double dephasing_error(const Eigen::Matrix3d& c) {
  return (3.0 * c.trace() - 2.0 * (c(0, 1) + c(0, 2) + c(1, 2))) / 20.0;
}

double quasistatic_dephasing_error(const std::array<double, 3>& e) {
  const double sq = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
  const double cross = e[0] * e[1] + e[0] * e[2] + e[1] * e[2];
  return (3.0 * sq - 2.0 * cross) / 10.0;
}

Eigen::Matrix3d quasistatic_covariance(const std::array<double, 3>& e) {
  Eigen::Matrix3d c;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) c(m, n) = 2.0 * e[m] * e[n];
  return c;
}

RBErrorBreakdown rb_error(const RateCurves& curves, const NoiseSpec& noise, const PulseShape& pulse,
                          DephasingKind kind) {
  RBErrorBreakdown out;
  const IntegratedTransitions t = integrate_transitions(curves, pulse);
  out.transition_ss = t.gamma_ss_tau / 5.0;
  out.transition_sl = t.gamma_sl_tau / 4.0;
  out.transition = out.transition_ss + out.transition_sl;
  const auto s = integrate_p(flux_sensitivity(curves, pulse), pulse.dt_ns);
  const double scale = noise.sigma_uphi0 * kMicro / std::sqrt(2.0);
  for (int m = 0; m < 3; ++m) out.eps_phi[m] = s[m] * scale;
  if (kind == DephasingKind::quasistatic) {
    out.covariance = quasistatic_covariance(out.eps_phi);
    out.dephasing = quasistatic_dephasing_error(out.eps_phi);
  } else {
    out.covariance = phase_covariance(curves, noise, pulse, kind).matrix;
    out.dephasing = dephasing_error(out.covariance);
  }
  out.total = out.transition + out.dephasing;
  return out;
}

RBErrorBreakdown rb_error(const CircuitModel& model, const NoiseSpec& noise, const PulseShape& pulse,
                          DephasingKind kind) {
  return rb_error(rate_curves_for_pulse(model, noise, pulse), noise, pulse, kind);
}

const std::vector<RBState>& rb_states() {
  static const std::vector<RBState> states = [] {
    using C = std::complex<double>;
    const std::array<std::string, 4> names{"00", "01", "10", "11"};
    const std::array<C, 4> phases{C(1, 0), C(-1, 0), C(0, 1), C(0, -1)};
    const std::array<std::string, 4> phase_names{"+", "-", "+i", "-i"};
    std::vector<RBState> out;
    for (int k = 0; k < 4; ++k) {
      RBState s{names[k], "basis", Eigen::VectorXcd::Zero(4)};
      s.amplitudes(k) = 1.0;
      out.push_back(std::move(s));
    }
    const double r2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        for (int p = 0; p < 4; ++p) {
          RBState s{names[i] + phase_names[p] + names[j], "pair", Eigen::VectorXcd::Zero(4)};
          s.amplitudes(i) = r2;
          s.amplitudes(j) = r2 * phases[p];
          out.push_back(std::move(s));
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        for (int sign = 0; sign < 2; ++sign) {
          const C c = (sign == 0 ? 1.0 : -1.0) * phases[a] * phases[b];
          RBState s{"quad(a" + phase_names[a] + ",b" + phase_names[b] + ",c" + (sign == 0 ? "+ab" : "-ab") + ")",
                    "quad", Eigen::VectorXcd(4)};
          s.amplitudes << 0.5, 0.5 * phases[a], 0.5 * phases[b], 0.5 * c;
          out.push_back(std::move(s));
        }
      }
    }
    return out;
  }();
  return states;
}

StateErrorTable rb_state_errors(const IntegratedTransitions& t, const Eigen::Matrix3d& cov) {
  StateErrorTable table;
  for (const auto& st : rb_states()) {
    std::array<double, 4> pop{};
    for (int k = 0; k < 4; ++k) pop[k] = std::norm(st.amplitudes(k));
    StateErrorRow row{st.name, st.group};
    for (int s = 0; s < 4; ++s) {
      row.leakage += pop[s] * t.leak[s];
      for (int u = 0; u < 4; ++u) {
        if (u != s) row.intra += pop[s] * (1.0 - pop[u]) * t.intra[s][u];
      }
    }
    for (int m = 0; m < 3; ++m) {
      row.dephasing += pop[m + 1] * cov(m, m);
      for (int n = 0; n < 3; ++n) row.dephasing -= pop[m + 1] * pop[n + 1] * cov(m, n);
    }
    table.mean_dephasing += row.dephasing;
    table.mean_leakage += row.leakage;
    table.mean_intra += row.intra;
    table.rows.push_back(std::move(row));
  }
  const double n = static_cast<double>(table.rows.size());
  table.mean_dephasing /= n;
  table.mean_leakage /= n;
  table.mean_intra /= n;
  return table;
}

std::vector<TabulatedRow> rb_state_error_rows(const IntegratedTransitions& t, const Eigen::Matrix3d& c) {
  const auto& g = t.intra;
  const auto& l = t.leak;
  // Covariance indices: 0 -> 01, 1 -> 10, 2 -> 11.
  return {
      {"00", 0.0, 0.0, 0.0},
      {"01", 0.0, l[1], g[1][0] + g[1][2]},
      {"10", 0.0, l[2], g[2][0] + g[2][1]},
      {"11", 0.0, l[3], g[3][2] + g[3][1]},
      {"00,01", c(0, 0) / 4.0, l[1] / 2.0, g[1][0] / 4.0 + g[1][2] / 2.0},
      {"00,10", c(1, 1) / 4.0, l[2] / 2.0, g[2][0] / 4.0 + g[2][1] / 2.0},
      {"00,11", c(2, 2) / 4.0, l[3] / 2.0, g[3][2] / 2.0 + g[3][1] / 2.0},
      {"01,10", (c(0, 0) - 2.0 * c(0, 1) + c(1, 1)) / 4.0, (l[1] + l[2]) / 2.0,
       g[2][0] / 2.0 + g[1][0] / 2.0 + g[2][1] / 4.0 + g[1][2] / 4.0},
      {"01,11", (c(2, 2) - 2.0 * c(0, 2) + c(0, 0)) / 4.0, (l[1] + l[3]) / 2.0,
       g[3][2] / 2.0 + g[3][1] / 4.0 + g[1][0] / 2.0 + g[1][2] / 2.0},
      {"10,11", (c(2, 2) - 2.0 * c(1, 2) + c(1, 1)) / 4.0, (l[2] + l[3]) / 2.0,
       g[3][2] / 4.0 + g[3][1] / 2.0 + g[2][0] / 2.0 + g[2][1] / 2.0},
      {"quad", (3.0 * c.trace() - 2.0 * (c(0, 1) + c(0, 2) + c(1, 2))) / 16.0, (l[3] + l[2] + l[1]) / 4.0,
       3.0 * (g[3][2] + g[3][2] + g[2][0] + g[1][0] + g[1][2] + g[2][1]) / 16.0},
  };
}

}  // namespace czpulse
