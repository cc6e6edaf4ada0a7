#include "czpulse/experiments.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "czpulse/errors.hpp"
#include "czpulse/perturbation.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rho_for(double g_mhz, double wi_ghz, double wj_ghz) { return g_mhz * 1e-3 / std::sqrt(wi_ghz * wj_ghz); }

ModeSpec mode(std::string label, double f, double a, Truncation t, bool tunable = false) {
  return ModeSpec{std::move(label), f, a, t.levels, tunable};
}

CircuitSpec three_mode(double w1, double w2, double a1, double a2, double ac, double r1c, double r2c, double r12,
                       Truncation t) {
  CircuitSpec s;
  s.modes = {mode("Q1", w1, a1, t), mode("C", 0.0, ac, t, true), mode("Q2", w2, a2, t)};
  s.couplings = {{0, 1, r1c}, {1, 2, r2c}};
  if (r12 != 0.0) s.couplings.push_back({0, 2, r12});
  s.qubit_indices = {0, 2};
  s.coupler_index = 1;
  s.max_excitations = t.max_excitations;
  return s;
}

// |zeta| at one bias when the computational states can be named there directly.
std::optional<double> pointwise_zeta(const CircuitModel& model, double omega_c_ghz) {
  const Eigensystem es = diagonalize(model, omega_c_ghz);
  const auto labels = computational_labels(model.spec());
  const auto cols = label_columns(model.basis(), es, labels, 0.9);
  if (!cols) return std::nullopt;
  Eigen::VectorXd e(4);
  for (int i = 0; i < 4; ++i) e(i) = es.values((*cols)[static_cast<std::size_t>(i)]);
  return zz_combination(e);
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::array<double, 3> fit_quadratic(const std::vector<double>& x, const std::vector<double>& y, double& r2) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = x[static_cast<std::size_t>(i)];
    a(i, 2) = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - a * c;
  const double mean = b.mean();
  const double tot = (b.array() - mean).square().sum();
  r2 = tot > 0.0 ? 1.0 - res.squaredNorm() / tot : 1.0;
  return {c(0), c(1), c(2)};
}

double eval_quadratic(const std::array<double, 3>& c, double x) { return c[0] + c[1] * x + c[2] * x * x; }

}  // namespace

// ------------------------------------------------------------------ presets

CircuitSpec reference_circuit(Truncation t) {
  CircuitSpec s = three_mode(6.0, 5.4, -0.25, -0.25, -0.3, 0.018, 0.018, 0.0015, t);
  s.idle_ghz = 7.87;
  s.flux_map = FluxMapSpec{8.2, -0.3};
  return s;
}

CircuitSpec gate_circuit() { return reference_circuit({4, 4}); }

CircuitSpec fixed_coupling_circuit(const FixedCouplingParams& p, double omega_c_ghz, Truncation t) {
  const double w1 = p.omega1_ghz;
  const double w2 = p.omega1_ghz - p.delta12_mhz * 1e-3;
  CircuitSpec s = three_mode(w1, w2, p.alpha1_mhz * 1e-3, p.alpha2_mhz * 1e-3, p.alphac_mhz * 1e-3,
                             rho_for(p.g1c_mhz, w1, omega_c_ghz), rho_for(p.g2c_mhz, w2, omega_c_ghz),
                             rho_for(p.g12_mhz, w1, w2), t);
  s.idle_ghz = omega_c_ghz;
  return s;
}

CircuitSpec coupler_free_circuit(Truncation t) {
  CircuitSpec s;
  s.modes = {mode("Q1", 6.0, -0.25, t), mode("Q2", 0.0, -0.25, t, true)};
  s.couplings = {{0, 1, 0.005}};
  s.qubit_indices = {0, 1};
  s.coupler_index = 1;
  s.max_excitations = t.max_excitations;
  s.idle_ghz = 8.0;
  return s;
}

CircuitSpec coupling_variant(double rho_qc, double rho_qq, Truncation t) {
  CircuitSpec s = three_mode(6.0, 5.4, -0.25, -0.25, -0.3, rho_qc, rho_qc, rho_qq, t);
  s.flux_map = FluxMapSpec{8.2, -0.3};
  s.idle_ghz = find_idle(s, 7.2, 8.2);
  return s;
}

// ------------------------------------------------------------------ spectra

ZZCurve zz_curve(const CircuitModel& model, const std::vector<double>& grid_ghz, const TrackingOptions& options) {
  const SpectrumGrid g = track_adiabatic(model, grid_ghz, computational_labels(model.spec()), options);
  ZZCurve c;
  c.omega_c_ghz = g.omega_c_ghz;
  for (std::size_t k = 0; k < g.omega_c_ghz.size(); ++k) {
    c.zeta_mhz.push_back(k < g.zeta.size() ? rad_to_mhz(g.zeta[k]) : kNaN);
    c.g_eff_mhz.push_back(k < g.g_eff.size() ? rad_to_mhz(g.g_eff[k]) : kNaN);
    c.d_factor.push_back(k < g.d_factor.size() ? g.d_factor[k] : kNaN);
    c.d_divergent.push_back(k < g.d_divergent.size() && g.d_divergent[k]);
  }
  return c;
}

ZZSwitch zz_switch(const CircuitSpec& spec, const std::vector<double>& grid_ghz) {
  ZZSwitch out;
  out.with_direct = zz_curve(CircuitModel(spec), grid_ghz);
  CircuitSpec bare = spec;
  std::erase_if(bare.couplings, [&](const CouplingSpec& c) {
    const auto& q = spec.qubit_indices;
    return std::find(q.begin(), q.end(), c.i) != q.end() && std::find(q.begin(), q.end(), c.j) != q.end();
  });
  out.without_direct = zz_curve(CircuitModel(bare), grid_ghz);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double z : out.with_direct.zeta_mhz) {
    lo = std::min(lo, std::abs(z));
    hi = std::max(hi, std::abs(z));
  }
  out.min_abs_khz = lo * 1e3;
  out.max_abs_mhz = hi;
  out.on_off_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<SpectrumRow> tracked_spectrum(const CircuitModel& model, const std::vector<double>& grid_ghz,
                                          int max_photons) {
  std::vector<Occupation> labels;
  for (const auto& occ : model.basis().occupations()) {
    int n = 0;
    for (int x : occ) n += x;
    if (n <= max_photons) labels.push_back(occ);
  }
  TrackingOptions opt;
  opt.compute_d_factor = false;
  const SpectrumGrid g = track_adiabatic(model, grid_ghz, labels, opt);
  std::vector<SpectrumRow> rows;
  for (std::size_t k = 0; k < g.omega_c_ghz.size(); ++k) {
    for (std::size_t c = 0; c < g.labels.size(); ++c) {
      rows.push_back({g.omega_c_ghz[k], to_string(g.labels[c]),
                      rad_to_ghz(g.tracked_energies[k](static_cast<Eigen::Index>(c)))});
    }
  }
  return rows;
}

double find_idle(const CircuitSpec& spec, double lo_ghz, double hi_ghz, std::size_t samples) {
  if (!(hi_ghz > lo_ghz) || samples < 3) throw ConfigError("idle search needs an increasing range");
  CircuitSpec s = spec;
  s.idle_ghz.reset();
  const CircuitModel model(s);
  const auto grid = linspace(lo_ghz, hi_ghz, samples);
  std::optional<std::size_t> best;
  double best_v = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto z = pointwise_zeta(model, grid[k]);
    if (z && (!best || std::abs(*z) < best_v)) {
      best = k;
      best_v = std::abs(*z);
    }
  }
  if (!best) throw TrackingError("no dispersive bias found while searching for the idle point");
  double a = grid[*best > 0 ? *best - 1 : 0];
  double b = grid[std::min(*best + 1, grid.size() - 1)];
  auto f = [&](double x) {
    const auto z = pointwise_zeta(model, x);
    return z ? std::abs(*z) : std::numeric_limits<double>::infinity();
  };
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 60 && b - a > 1e-7; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return f(x) <= best_v ? x : grid[*best];
}

// ------------------------------------------------------- residual-ZZ locus

double zero_geff_g12_mhz(const FixedCouplingParams& p, double delta1c_mhz) {
  const double w1 = p.omega1_ghz * 1e3;
  const double w2 = w1 - p.delta12_mhz;
  const double wc = w1 - delta1c_mhz;
  const double d1 = w1 - wc;
  const double d2 = w2 - wc;
  const double s1 = w1 + wc;
  const double s2 = w2 + wc;
  return -0.5 * p.g1c_mhz * p.g2c_mhz * (1.0 / d1 + 1.0 / d2 - 1.0 / s1 - 1.0 / s2);
}

LocusResult residual_zz_locus(const LocusOptions& o) {
  if (o.n_delta < 2 || o.n_g12 < 2) throw ConfigError("locus grid needs at least 2 x 2 points");
  LocusResult r;
  r.delta1c_mhz = linspace(o.delta1c_lo_mhz, o.delta1c_hi_mhz, o.n_delta);
  r.g12_mhz = linspace(o.g12_lo_mhz, o.g12_hi_mhz, o.n_g12);
  r.abs_zeta_mhz.resize(static_cast<Eigen::Index>(o.n_g12), static_cast<Eigen::Index>(o.n_delta));
  FixedCouplingParams p;
  p.delta12_mhz = o.delta12_mhz;
  const double cell_d = r.delta1c_mhz[1] - r.delta1c_mhz[0];
  const double cell_g = r.g12_mhz[1] - r.g12_mhz[0];
  std::size_t hits = 0;
  for (std::size_t j = 0; j < o.n_delta; ++j) {
    const double wc = p.omega1_ghz - r.delta1c_mhz[j] * 1e-3;
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.n_g12; ++i) {
      p.g12_mhz = r.g12_mhz[i];
      const CircuitModel model(fixed_coupling_circuit(p, wc, o.truncation));
      const auto z = pointwise_zeta(model, wc);
      const double v = z ? std::abs(rad_to_mhz(*z)) : kNaN;
      r.abs_zeta_mhz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      if (z && v < best) {
        best = v;
        arg = i;
      }
    }
    r.argmin_g12_mhz.push_back(r.g12_mhz[arg]);
    r.zero_geff_g12_mhz.push_back(zero_geff_g12_mhz(p, r.delta1c_mhz[j]));
    double closest = std::numeric_limits<double>::infinity();
    for (int k = -20; k <= 20; ++k) {
      const double d = r.delta1c_mhz[j] + cell_d * k / 20.0;
      closest = std::min(closest, std::abs(zero_geff_g12_mhz(p, d) - r.g12_mhz[arg]));
    }
    const bool ok = closest <= cell_g * (1.0 + 1e-9);
    r.within_cell.push_back(ok);
    hits += ok ? 1 : 0;
  }
  r.fraction_within = static_cast<double>(hits) / static_cast<double>(o.n_delta);
  return r;
}

// ----------------------------------------------------------- parabola law

ParabolaResult parabola_law(const ParabolaOptions& o) {
  if (o.delta12_mhz.size() < 2) throw ConfigError("parabola law needs at least two detunings");
  if (!(o.nu > 0.0)) throw ConfigError("nu must be positive");
  ParabolaResult out;
  const double aq = o.base.alpha1_mhz;
  out.predicted_g_mhz = aq * o.nu;
  out.predicted_zeta_mhz = 4.0 * (2.0 * o.base.alphac_mhz + aq) * o.nu * o.nu;
  for (double d12 : o.delta12_mhz) {
    FixedCouplingParams p = o.base;
    p.delta12_mhz = d12;
    const double k = p.g1c_mhz * p.g2c_mhz / (2.0 * o.nu);
    const double d1c = 0.5 * (d12 - std::sqrt(d12 * d12 + 4.0 * k));
    const double wc = p.omega1_ghz - d1c * 1e-3;
    const double mediated = -zero_geff_g12_mhz(p, d1c);
    ParabolaFit fit;
    fit.delta12_mhz = d12;
    fit.delta1c_mhz = d1c;
    for (double g : linspace(out.predicted_g_mhz - o.g_span_mhz, out.predicted_g_mhz + o.g_span_mhz, o.samples)) {
      p.g12_mhz = g - mediated;
      const CircuitSpec spec = fixed_coupling_circuit(p, wc, o.truncation);
      const CircuitModel model(spec);
      const auto z = pointwise_zeta(model, wc);
      if (!z) throw TrackingError("computational states not dispersive in the parabola scan");
      fit.g_eff_mhz.push_back(rad_to_mhz(effective_coupling(spec, wc)));
      fit.zeta_mhz.push_back(rad_to_mhz(*z));
      fit.nu = coupling_ratio_nu(spec, wc);
    }
    fit.coeffs = fit_quadratic(fit.g_eff_mhz, fit.zeta_mhz, fit.r_squared);
    out.fits.push_back(std::move(fit));
  }
  std::vector<double> gs;
  std::vector<double> zs;
  for (std::size_t i = 0; i < out.fits.size(); ++i) {
    for (std::size_t j = i + 1; j < out.fits.size(); ++j) {
      const auto& a = out.fits[i].coeffs;
      const auto& b = out.fits[j].coeffs;
      const double c0 = a[0] - b[0];
      const double c1 = a[1] - b[1];
      const double c2 = a[2] - b[2];
      std::vector<double> roots;
      if (std::abs(c2) < 1e-15) {
        if (std::abs(c1) > 0.0) roots.push_back(-c0 / c1);
      } else {
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc >= 0.0) {
          roots.push_back((-c1 + std::sqrt(disc)) / (2.0 * c2));
          roots.push_back((-c1 - std::sqrt(disc)) / (2.0 * c2));
        } else {
          // Nearly tangent fits: closest approach of the two curves.
          roots.push_back(-c1 / (2.0 * c2));
        }
      }
      if (roots.empty()) continue;
      double g = roots.front();
      for (double x : roots) {
        if (std::abs(x - out.predicted_g_mhz) < std::abs(g - out.predicted_g_mhz)) g = x;
      }
      gs.push_back(g);
      zs.push_back(0.5 * (eval_quadratic(a, g) + eval_quadratic(b, g)));
    }
  }
  out.common_g_mhz = median(gs);
  out.common_zeta_mhz = median(zs);
  return out;
}

BiasSweepParabola parabola_bias_sweep(const FixedCouplingParams& p, const std::vector<double>& omega_c_ghz,
                                      Truncation t) {
  BiasSweepParabola out;
  out.delta12_mhz = p.delta12_mhz;
  for (double wc : omega_c_ghz) {
    const double w1 = p.omega1_ghz;
    const double w2 = w1 - p.delta12_mhz * 1e-3;
    // Couplings fixed by the coefficients at a 7.5 GHz reference bias.
    CircuitSpec spec = three_mode(w1, w2, p.alpha1_mhz * 1e-3, p.alpha2_mhz * 1e-3, p.alphac_mhz * 1e-3,
                                  rho_for(p.g1c_mhz, w1, 7.5), rho_for(p.g2c_mhz, w2, 7.5),
                                  rho_for(p.g12_mhz, w1, w2), t);
    spec.idle_ghz = wc;
    const CircuitModel model(spec);
    const auto z = pointwise_zeta(model, wc);
    if (!z) continue;
    out.omega_c_ghz.push_back(wc);
    out.zeta_mhz.push_back(rad_to_mhz(*z));
    out.g_eff_mhz.push_back(rad_to_mhz(effective_coupling(spec, wc)));
    out.nu.push_back(coupling_ratio_nu(spec, wc));
  }
  return out;
}

// ------------------------------------------------------ perturbation grid

double zeta2_direct_closed_form(double w1, double w2, double a1, double a2, double g) {
  const double d = w1 - w2;
  const double s = w1 + w2;
  const double g2 = g * g;
  return -2.0 * g2 / (d + a1) + 2.0 * g2 / (d - a2) + 2.0 * g2 / (s + a1) + 2.0 * g2 / (s + a2) -
         4.0 * g2 / (s + a1 + a2);
}

std::vector<PerturbationRow> perturbation_grid(const FixedCouplingParams& base, const std::vector<double>& omega_c_ghz,
                                               const std::vector<double>& g12_mhz, Truncation t) {
  std::vector<PerturbationRow> rows;
  for (double wc : omega_c_ghz) {
    for (double g12 : g12_mhz) {
      FixedCouplingParams p = base;
      p.g12_mhz = g12;
      const CircuitSpec spec = fixed_coupling_circuit(p, wc, t);
      const CircuitModel model(spec);
      PerturbationRow row{wc, g12, kNaN, kNaN, kNaN, kNaN, false};
      const double w1 = p.omega1_ghz;
      const double w2 = w1 - p.delta12_mhz * 1e-3;
      row.dispersive = std::abs(w1 - wc) * 1e3 >= 8.0 * p.g1c_mhz && std::abs(w2 - wc) * 1e3 >= 8.0 * p.g2c_mhz;
      if (const auto z = pointwise_zeta(model, wc)) row.zeta_exact_mhz = rad_to_mhz(*z);
      try {
        const PerturbativeResult pr = zeta_fourth_order_generic(spec, wc);
        row.zeta_generic_mhz = rad_to_mhz(pr.zeta_total);
        row.nu = pr.nu;
        row.zeta_simplified_mhz = rad_to_mhz(zeta_simplified(
            ghz_to_rad(w1 - w2), mhz_to_rad(p.alpha1_mhz), mhz_to_rad(p.alpha2_mhz), mhz_to_rad(p.alphac_mhz),
            effective_coupling(spec, wc), pr.nu));
      } catch (const DomainError& e) {
        spdlog::debug("perturbation skipped at {} GHz, g12 {} MHz: {}", wc, g12, e.what());
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// ------------------------------------------------------- two-level check

NullTest two_level_null_test(const CircuitSpec& spec, double omega_c_ghz) {
  CircuitSpec full = spec;
  const auto& q = spec.qubit_indices;
  std::erase_if(full.couplings, [&](const CouplingSpec& c) {
    return std::find(q.begin(), q.end(), c.i) != q.end() && std::find(q.begin(), q.end(), c.j) != q.end();
  });
  CircuitSpec two = full;
  for (auto& m : two.modes) m.levels = 2;
  two.max_excitations.reset();
  NullTest r;
  r.omega_c_ghz = omega_c_ghz;
  r.zeta_full_mhz = rad_to_mhz(zz_strength(CircuitModel(full), omega_c_ghz));
  r.zeta_two_level_mhz = rad_to_mhz(zz_strength(CircuitModel(two), omega_c_ghz));
  r.ratio = std::abs(r.zeta_two_level_mhz) / std::abs(r.zeta_full_mhz);
  return r;
}

// ------------------------------------------------------------------ gates

std::vector<GateTimeRow> gate_time_sweep(const CircuitModel& model, const std::vector<double>& tg_ns,
                                         const std::vector<std::pair<PulseKind, int>>& shapes,
                                         const GateOptions& options) {
  const double idle = options.idle_ghz ? *options.idle_ghz : model.spec().idle_ghz.value_or(0.0);
  std::shared_ptr<const AdiabaticTable> table = make_table(model, idle, options.table);
  std::vector<GateTimeRow> rows;
  for (const auto& [kind, m] : shapes) {
    for (double tg : tg_ns) {
      GateOptions o = options;
      o.kind = kind;
      o.m_max = m;
      GateTimeRow row;
      row.tg_ns = tg;
      row.kind = kind;
      row.m_max = m;
      row.result = optimize_pulse(model, tg, o, table);
      spdlog::info("{} m={} tg={} ns: epg {:.3e}", to_string(kind), m, tg, row.result.report.epg);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Deviation parse_deviation(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("deviation must look like 'param,delta', got '" + text + "'");
  Deviation d;
  d.parameter = text.substr(0, comma);
  std::string value = text.substr(comma + 1);
  static const std::set<std::string> known{"omega1", "omega2", "alpha1", "alpha2", "alphac",
                                           "rho1c",  "rho2c",  "rho12"};
  if (!known.count(d.parameter)) throw ConfigError("unknown deviation parameter '" + d.parameter + "'");
  std::string unit;
  while (!value.empty() && (std::isalpha(static_cast<unsigned char>(value.back())) || value.back() == '%')) {
    unit.insert(unit.begin(), value.back());
    value.pop_back();
  }
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw ConfigError("bad deviation value in '" + text + "'");
  }
  std::string u;
  for (char c : unit) u.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  const bool is_rho = d.parameter.rfind("rho", 0) == 0;
  if (is_rho) {
    if (u == "%") v *= 0.01;
    else if (!u.empty()) throw ConfigError("coupling deviations take a fraction or a percentage");
  } else {
    if (u == "ghz") v *= 1e3;
    else if (!u.empty() && u != "mhz") throw ConfigError("frequency deviations take MHz or GHz");
  }
  d.delta = v;
  return d;
}

CircuitSpec apply_deviation(const CircuitSpec& spec, const Deviation& d) {
  if (spec.qubit_indices.size() != 2) throw ConfigError("deviations need a two-qubit circuit");
  CircuitSpec s = spec;
  const int q1 = spec.qubit_indices[0];
  const int q2 = spec.qubit_indices[1];
  const int c = spec.coupler_index;
  auto rho = [&](int i, int j) {
    for (auto& cp : s.couplings) {
      if ((cp.i == i && cp.j == j) || (cp.i == j && cp.j == i)) {
        cp.rho *= 1.0 + d.delta;
        return;
      }
    }
    throw ConfigError("circuit has no coupling for deviation '" + d.parameter + "'");
  };
  if (d.parameter == "omega1") s.modes[q1].frequency_ghz += d.delta * 1e-3;
  else if (d.parameter == "omega2") s.modes[q2].frequency_ghz += d.delta * 1e-3;
  else if (d.parameter == "alpha1") s.modes[q1].anharmonicity_ghz += d.delta * 1e-3;
  else if (d.parameter == "alpha2") s.modes[q2].anharmonicity_ghz += d.delta * 1e-3;
  else if (d.parameter == "alphac") s.modes[c].anharmonicity_ghz += d.delta * 1e-3;
  else if (d.parameter == "rho1c") rho(q1, c);
  else if (d.parameter == "rho2c") rho(q2, c);
  else if (d.parameter == "rho12") rho(q1, q2);
  else throw ConfigError("unknown deviation parameter '" + d.parameter + "'");
  s.validate();
  return s;
}

std::vector<Deviation> standard_deviations() {
  std::vector<Deviation> out;
  for (const char* p : {"omega1", "omega2", "alpha1", "alpha2", "alphac"}) {
    out.push_back({p, -10.0});
    out.push_back({p, 10.0});
  }
  for (const char* p : {"rho1c", "rho2c", "rho12"}) {
    out.push_back({p, -0.1});
    out.push_back({p, 0.1});
  }
  return out;
}

std::vector<RobustnessRow> robustness_scan(const CircuitSpec& nominal, double tg_ns,
                                           const std::vector<Deviation>& deviations, const GateOptions& options) {
  const CircuitModel nominal_model(nominal);
  GateOptions o = options;
  if (!o.idle_ghz) o.idle_ghz = nominal.idle_ghz;
  if (!o.idle_ghz) throw ConfigError("robustness scan needs an idle bias");
  const auto table = make_table(nominal_model, *o.idle_ghz, o.table);
  if (o.initial_lambdas.empty()) o.initial_lambdas = calibrated_guess(nominal_model, *table, tg_ns, o);
  std::vector<RobustnessRow> rows;
  for (const auto& d : deviations) {
    const CircuitModel model(apply_deviation(nominal, d));
    RobustnessRow row{d, optimize_pulse(model, tg_ns, o, table)};
    spdlog::info("deviation {} {:+g}: epg {:.3e}", d.parameter, d.delta, row.result.report.epg);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::pair<std::string, CircuitSpec>> distortion_configurations() {
  return {{"gqc70", coupling_variant(0.012, 0.0006)},
          {"gqc105", coupling_variant(0.018, 0.0015)},
          {"gqc175", coupling_variant(0.03, 0.0036)},
          {"coupler-free", coupler_free_circuit()}};
}

std::vector<DistortionRow> distortion_scan(const std::vector<std::pair<std::string, CircuitSpec>>& configurations,
                                           double tg_ns, const std::vector<double>& r_values, double delay_ns,
                                           const GateOptions& options) {
  std::vector<DistortionRow> rows;
  for (const auto& [name, spec] : configurations) {
    const CircuitModel model(spec);
    GateOptions o = options;
    o.idle_ghz = spec.idle_ghz;
    const auto table = make_table(model, *o.idle_ghz, std::nullopt);
    const double zeta_idle = zz_strength(model, *o.idle_ghz);
    o.initial_lambdas = calibrated_guess(model, *table, tg_ns, o);
    for (double r : r_values) {
      o.distortion = Distortion{r, delay_ns};
      const GateResult g = optimize_pulse(model, tg_ns, o, table);
      rows.push_back({name, r, delay_ns, g.report.epg, rad_to_mhz(zeta_idle) * 1e3});
      spdlog::info("{} r={}: epg {:.3e}", name, r, g.report.epg);
    }
  }
  return rows;
}

double coupler_excited_error(const CircuitModel& model, const PulseShape& pulse, double idle_ghz) {
  const CircuitSpec& spec = model.spec();
  if (spec.qubit_indices.size() != 2) throw DomainError("coupler-excited error needs two qubits");
  const Eigen::MatrixXcd u = propagate(model, pulse);
  const GateReport report = computational_unitary(u, model, idle_ghz);
  const Eigen::MatrixXcd cz = controlled_phase_target(2, 0, 1);
  const EpgResult best = epg(report.unitary, cz);

  auto labels = computational_labels(spec);
  for (auto& l : labels) l[static_cast<std::size_t>(spec.coupler_index)] = 1;
  TrackingOptions topt;
  topt.anchor_ghz = idle_ghz;
  const LabelledPoint p = labelled_point(model, idle_ghz, labels, topt);
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(model.dim()), 4);
  for (int c = 0; c < 4; ++c) v.col(c) = p.eigensystem.vectors.col(p.columns[static_cast<std::size_t>(c)]).cast<std::complex<double>>();
  Eigen::MatrixXcd sub = v.adjoint() * u * v;
  for (int s = 0; s < 4; ++s) {
    const double ph = ((s >> 1) & 1) * best.z_phases[0] + (s & 1) * best.z_phases[1];
    sub.row(s) *= std::polar(1.0, ph);
  }
  return state_averaged_error(sub, cz);
}

// ------------------------------------------------------------- design map

DesignPoint design_point(double delta12_mhz, double alphac_mhz, double tg_ns, const GateOptions& options,
                         Truncation t) {
  DesignPoint d;
  d.delta12_mhz = delta12_mhz;
  d.alphac_mhz = alphac_mhz;
  d.epg = kNaN;
  d.idle_ghz = kNaN;
  try {
    CircuitSpec s = three_mode(6.0, 6.0 - delta12_mhz * 1e-3, -0.25, -0.25, alphac_mhz * 1e-3, 0.018, 0.018,
                               0.0015, t);
    s.idle_ghz = find_idle(s, 6.8, 9.0);
    d.idle_ghz = *s.idle_ghz;
    const CircuitModel model(s);
    GateOptions o = options;
    o.idle_ghz = s.idle_ghz;
    o.initial_lambdas.clear();
    d.epg = optimize_pulse(model, tg_ns, o).report.epg;
  } catch (const Error& e) {
    d.error = std::string(e.kind()) + ": " + e.what();
  }
  return d;
}

IndicatorMap indicator_map(double delta12_mhz, const std::vector<double>& alphac_mhz,
                           const std::vector<double>& omega_c_ghz, double idle_ghz, Truncation t) {
  IndicatorMap m;
  m.alphac_mhz = alphac_mhz;
  m.omega_c_ghz = omega_c_ghz;
  const auto rows = static_cast<Eigen::Index>(alphac_mhz.size());
  const auto cols = static_cast<Eigen::Index>(omega_c_ghz.size());
  m.abs_zeta_mhz = Eigen::MatrixXd::Constant(rows, cols, kNaN);
  m.d_star = Eigen::MatrixXd::Constant(rows, cols, kNaN);
  std::size_t anchor = 0;
  for (std::size_t k = 1; k < omega_c_ghz.size(); ++k) {
    if (std::abs(omega_c_ghz[k] - idle_ghz) < std::abs(omega_c_ghz[anchor] - idle_ghz)) anchor = k;
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    CircuitSpec s = three_mode(6.0, 6.0 - delta12_mhz * 1e-3, -0.25, -0.25, alphac_mhz[static_cast<std::size_t>(r)] * 1e-3,
                               0.018, 0.018, 0.0015, t);
    s.idle_ghz = idle_ghz;
    try {
      TrackingOptions opt;
      opt.anchor_ghz = idle_ghz;
      const ZZCurve c = zz_curve(CircuitModel(s), omega_c_ghz, opt);
      if (c.omega_c_ghz.size() != omega_c_ghz.size()) throw TrackingError("grid changed during tracking");
      std::vector<double> d = c.d_factor;
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (c.d_divergent[k]) d[k] = std::numeric_limits<double>::infinity();
      }
      const auto ds = running_max_from(d, anchor);
      for (Eigen::Index k = 0; k < cols; ++k) {
        m.abs_zeta_mhz(r, k) = std::abs(c.zeta_mhz[static_cast<std::size_t>(k)]);
        m.d_star(r, k) = ds[static_cast<std::size_t>(k)];
      }
    } catch (const Error& e) {
      spdlog::warn("indicator map row alpha_c={} MHz failed: {}", alphac_mhz[static_cast<std::size_t>(r)], e.what());
    }
  }
  return m;
}

// ------------------------------------------------------------------ stray

std::string to_string(StrayKind k) {
  switch (k) {
    case StrayKind::none: return "none";
    case StrayKind::qubit_qubit: return "qq";
    case StrayKind::coupler_coupler: return "cc";
    case StrayKind::qubit_coupler: return "qc";
  }
  return "none";
}

StrayKind stray_kind_from_string(const std::string& name) {
  if (name == "none") return StrayKind::none;
  if (name == "qq") return StrayKind::qubit_qubit;
  if (name == "cc") return StrayKind::coupler_coupler;
  if (name == "qc") return StrayKind::qubit_coupler;
  throw ConfigError("unknown stray coupling kind '" + name + "' (none, qq, cc, qc)");
}

double second_coupler_idle(const FiveModeOptions& o) {
  if (o.idle_c2_ghz) return *o.idle_c2_ghz;
  Truncation t = o.truncation;
  const double aq = o.alpha_q_mhz * 1e-3;
  const double ac = o.alpha_c_mhz * 1e-3;
  const CircuitSpec s = three_mode(o.omega2_ghz, o.omega3_ghz, aq, aq, ac, o.rho_qc, o.rho_qc, o.rho_qq, t);
  const double top = std::max(o.omega2_ghz, o.omega3_ghz);
  return find_idle(s, top + 1.0, top + 2.8);
}

CircuitSpec five_mode_circuit(const FiveModeOptions& o, StrayKind kind, double stray_mhz) {
  const Truncation t = o.truncation;
  const double aq = o.alpha_q_mhz * 1e-3;
  const double ac = o.alpha_c_mhz * 1e-3;
  const double c2 = second_coupler_idle(o);
  CircuitSpec s;
  s.modes = {mode("Q1", o.omega1_ghz, aq, t), mode("C1", 0.0, ac, t, true), mode("Q2", o.omega2_ghz, aq, t),
             mode("C2", c2, ac, t), mode("Q3", o.omega3_ghz, aq, t)};
  s.couplings = {{0, 1, o.rho_qc}, {1, 2, o.rho_qc}, {0, 2, o.rho_qq},
                 {2, 3, o.rho_qc}, {3, 4, o.rho_qc}, {2, 4, o.rho_qq}};
  if (stray_mhz != 0.0) {
    switch (kind) {
      case StrayKind::none: break;
      case StrayKind::qubit_qubit: s.couplings.push_back({0, 4, rho_for(stray_mhz, o.omega1_ghz, o.omega3_ghz)}); break;
      case StrayKind::coupler_coupler: s.couplings.push_back({1, 3, rho_for(stray_mhz, o.idle_c1_ghz, c2)}); break;
      case StrayKind::qubit_coupler: s.couplings.push_back({1, 4, rho_for(stray_mhz, o.idle_c1_ghz, o.omega3_ghz)}); break;
    }
  }
  s.qubit_indices = {0, 2, 4};
  s.coupler_index = 1;
  s.max_excitations = t.max_excitations;
  s.idle_ghz = o.idle_c1_ghz;
  return s;
}

std::vector<StrayRow> stray_scan(const FiveModeOptions& options, const std::vector<StrayKind>& kinds,
                                 const std::vector<double>& stray_mhz, double tg_ns, const GateOptions& gate_options,
                                 bool reoptimize) {
  const double aq = options.alpha_q_mhz * 1e-3;
  const double ac = options.alpha_c_mhz * 1e-3;
  CircuitSpec three = three_mode(options.omega1_ghz, options.omega2_ghz, aq, aq, ac, options.rho_qc, options.rho_qc,
                                 options.rho_qq, {4, 4});
  three.idle_ghz = options.idle_c1_ghz;
  const CircuitModel three_model(three);
  GateOptions o = gate_options;
  o.idle_ghz = options.idle_c1_ghz;
  o.zz_pair = {0, 1};
  const auto table = make_table(three_model, options.idle_c1_ghz, o.table);
  const GateResult three_best = optimize_pulse(three_model, tg_ns, o, table);
  o.initial_lambdas = three_best.lambdas;
  o.m_max = static_cast<int>(three_best.lambdas.size());
  const GateResult base = optimize_pulse(CircuitModel(five_mode_circuit(options, StrayKind::none, 0.0)), tg_ns, o, table);
  o.initial_lambdas = base.lambdas;
  spdlog::info("five-mode calibration: epg {:.3e}", base.report.epg);
  std::vector<StrayRow> rows;
  for (StrayKind kind : kinds) {
    for (double g : stray_mhz) {
      const CircuitModel model(five_mode_circuit(options, kind, g));
      const GateResult r = reoptimize ? optimize_pulse(model, tg_ns, o, table)
                                      : evaluate_gate(model, *table, tg_ns, base.lambdas, o);
      rows.push_back({kind, g, r.report.epg, r.report.leakage_total, r.report.unitarity_error});
      spdlog::info("stray {} {} MHz: epg {:.3e}", to_string(kind), g, r.report.epg);
    }
  }
  return rows;
}

// ------------------------------------------------------------------ noise

NoiseSpec reference_noise() {
  NoiseSpec n;
  n.t1_us = {20.0, 10.0, 20.0};
  n.flux_a_uphi0sq = 100.0;
  n.sigma_uphi0 = n.sigma_from_one_over_f();
  return n;
}

NoiseSpec improved_noise() {
  NoiseSpec n;
  n.t1_us = {1000.0, 1000.0, 1000.0};
  n.sigma_uphi0 = 6.0;
  n.flux_a_uphi0sq = 36.0 / (2.0 * std::log(n.f_uv_hz / n.f_ir_hz));
  return n;
}

PulseShape calibrated_awp(const CircuitModel& model, double tg_ns, const GateOptions& options) {
  GateOptions o = options;
  o.kind = PulseKind::awp;
  const double idle = o.idle_ghz ? *o.idle_ghz : model.spec().idle_ghz.value_or(0.0);
  const auto table = make_table(model, idle, o.table);
  const auto l = calibrated_guess(model, *table, tg_ns, o);
  return build_pulse(model, *table, tg_ns, l, o);
}

std::vector<NoiseErrorRow> noise_error_sweep(const CircuitModel& model, const std::vector<double>& tg_ns,
                                             const GateOptions& options, const NoiseSpec& reference,
                                             const NoiseSpec& improved) {
  const double idle = options.idle_ghz ? *options.idle_ghz : model.spec().idle_ghz.value_or(0.0);
  const auto table = make_table(model, idle, options.table);
  std::vector<NoiseErrorRow> rows;
  for (double tg : tg_ns) {
    const GateResult g = optimize_pulse(model, tg, options, table);
    NoiseErrorRow row;
    row.tg_ns = tg;
    row.coherent_epg = g.report.epg;
    row.reference = rb_error(model, reference, g.pulse);
    row.improved = rb_error(model, improved, g.pulse);
    rows.push_back(row);
  }
  return rows;
}

SensitivityComparison netzero_comparison(const CircuitModel& model, double tg_ns, const GateOptions& options,
                                         std::size_t freq_points) {
  const auto& spec = model.spec();
  if (!spec.flux_map) throw ConfigError("the Net-Zero comparison needs a flux map");
  const NoiseSpec noise = reference_noise();
  GateOptions uni = options;
  uni.kind = PulseKind::awp;
  const PulseShape pu = calibrated_awp(model, tg_ns, uni);

  GateOptions nz = options;
  nz.kind = PulseKind::netzero;
  nz.idle_ghz = spec.flux_map->omega_max_ghz;
  const auto table = make_table(model, *nz.idle_ghz, std::nullopt);
  const auto l = calibrated_guess(model, *table, tg_ns, nz);
  const PulseShape pn = build_pulse(model, *table, tg_ns, l, nz);

  const auto pu_sens = flux_sensitivity(rate_curves_for_pulse(model, noise, pu), pu);
  const auto pn_sens = flux_sensitivity(rate_curves_for_pulse(model, noise, pn), pn);
  SensitivityComparison out;
  auto sq = [](const std::array<std::complex<double>, 3>& f) { return std::norm(f[2]); };
  out.unipolar_zero = sq(sensitivity_spectrum(pu_sens, pu.dt_ns, 0.0));
  out.netzero_zero = sq(sensitivity_spectrum(pn_sens, pn.dt_ns, 0.0));
  const double lo = std::log10(1e4);
  const double hi = std::log10(1e9);
  for (std::size_t k = 0; k < freq_points; ++k) {
    const double f = std::pow(10.0, lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(freq_points - 1));
    out.freq_hz.push_back(f);
    out.unipolar_f11_sq.push_back(sq(sensitivity_spectrum(pu_sens, pu.dt_ns, f)));
    out.netzero_f11_sq.push_back(sq(sensitivity_spectrum(pn_sens, pn.dt_ns, f)));
  }
  return out;
}

// ---------------------------------------------------------------- schemes

CircuitSpec scheme_circuit(const std::string& name, Truncation t) {
  const bool above = name.rfind("CAQ", 0) == 0;
  const bool below = name.rfind("CBQ", 0) == 0;
  const bool up = name.size() == 5 && name[4] == 'U';
  const bool down = name.size() == 5 && name[4] == 'D';
  if (!(above || below) || !(up || down) || name[3] != '-') {
    throw ConfigError("unknown scheme '" + name + "' (CAQ-D, CAQ-U, CBQ-U, CBQ-D)");
  }
  const bool large = (above && down) || (below && up);
  const double w2 = large ? 5.4 : 5.9;
  const double rqc = above ? 0.03 : 0.04;
  const double rqq = above ? 0.004 : -0.004;
  CircuitSpec s = three_mode(6.0, w2, -0.25, -0.25, -0.3, rqc, rqc, rqq, t);
  if (above) s.idle_ghz = find_idle(s, 6.9, 9.5);
  else s.idle_ghz = find_idle(s, 2.5, w2 - 0.6);
  return s;
}

std::vector<SchemeCurve> scheme_curves(std::size_t samples, Truncation t) {
  std::vector<SchemeCurve> out;
  for (const char* name : {"CAQ-D", "CAQ-U", "CBQ-U", "CBQ-D"}) {
    const CircuitSpec s = scheme_circuit(name, t);
    const bool above = name[1] == 'A';
    const bool up = name[4] == 'U';
    const double w2 = s.modes[2].frequency_ghz;
    const double lo = above ? 6.0 + 0.1 : 2.0;
    const double hi = above ? 11.0 : w2 - 0.1;
    SchemeCurve c;
    c.name = name;
    c.idle_ghz = *s.idle_ghz;
    auto grid = linspace(lo, hi, samples);
    TrackingOptions opt;
    opt.anchor_ghz = c.idle_ghz;
    c.curve = zz_curve(CircuitModel(s), grid, opt);
    for (std::size_t k = 0; k < c.curve.omega_c_ghz.size(); ++k) {
      const double w = c.curve.omega_c_ghz[k];
      const bool on_side = up ? w >= c.idle_ghz : w <= c.idle_ghz;
      if (on_side) c.max_abs_zeta_mhz = std::max(c.max_abs_zeta_mhz, std::abs(c.curve.zeta_mhz[k]));
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------------- registry

namespace {

double get_or(const SweepPoint& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// Circuit overrides accepted by every registry experiment.
CircuitSpec with_overrides(const CircuitSpec& base, const SweepPoint& p) {
  static const std::set<std::string> circuit_keys{"omega1_ghz", "omega2_ghz", "alpha1_mhz", "alpha2_mhz",
                                                  "alphac_mhz", "rho1c",      "rho2c",      "rho12",
                                                  "idle_ghz"};
  CircuitSpec s = base;
  if (s.qubit_indices.size() != 2) return s;
  const int q1 = s.qubit_indices[0];
  const int q2 = s.qubit_indices[1];
  const int c = s.coupler_index;
  for (const auto& [k, v] : p) {
    if (!circuit_keys.count(k)) continue;
    if (k == "omega1_ghz") s.modes[q1].frequency_ghz = v;
    if (k == "omega2_ghz") s.modes[q2].frequency_ghz = v;
    if (k == "alpha1_mhz") s.modes[q1].anharmonicity_ghz = v * 1e-3;
    if (k == "alpha2_mhz") s.modes[q2].anharmonicity_ghz = v * 1e-3;
    if (k == "alphac_mhz") s.modes[c].anharmonicity_ghz = v * 1e-3;
    if (k == "idle_ghz") s.idle_ghz = v;
    if (k.rfind("rho", 0) == 0) {
      const int a = k == "rho2c" ? q2 : q1;
      const int b = k == "rho12" ? q2 : c;
      bool found = false;
      for (auto& cp : s.couplings) {
        if ((cp.i == a && cp.j == b) || (cp.i == b && cp.j == a)) {
          cp.rho = v;
          found = true;
        }
      }
      if (!found) s.couplings.push_back({std::min(a, b), std::max(a, b), v});
    }
  }
  s.validate();
  return s;
}

void check_keys(const SweepPoint& p, const std::set<std::string>& extra) {
  static const std::set<std::string> circuit_keys{"omega1_ghz", "omega2_ghz", "alpha1_mhz", "alpha2_mhz",
                                                  "alphac_mhz", "rho1c",      "rho2c",      "rho12",
                                                  "idle_ghz"};
  for (const auto& [k, v] : p) {
    if (!circuit_keys.count(k) && !extra.count(k)) throw ConfigError("axis '" + k + "' is not used by this experiment");
  }
}

}  // namespace

ExperimentRegistry default_registry(const RegistryContext& ctx) {
  ExperimentRegistry reg;

  reg.add({"zeta", "ZZ strength, effective coupling and D-factor at one coupler bias",
           {"zeta_mhz", "g_eff_mhz", "d_factor"}, [ctx](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"omega_c_ghz"});
             const CircuitSpec s = with_overrides(ctx.circuit, p);
             const double w = get_or(p, "omega_c_ghz", s.idle_ghz.value_or(0.0));
             const CircuitModel model(s);
             const double z = zz_strength(model, w);
             double g = kNaN;
             try {
               g = rad_to_mhz(effective_coupling(s, w));
             } catch (const DomainError&) {
             }
             return std::vector<double>{rad_to_mhz(z), g, d_factor(model, w).value};
           }});

  reg.add({"gate", "optimized CZ gate at the given gate time (tg_ns), distortion (r, td_ns) and filter",
           {"epg", "phi_zz_rad", "leakage_total", "lambda1"}, [ctx](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"tg_ns", "r", "td_ns", "filter_mhz", "m_max"});
             const CircuitSpec s = with_overrides(ctx.circuit, p);
             GateOptions o = ctx.gate;
             if (p.count("idle_ghz")) o.idle_ghz = p.at("idle_ghz");
             if (p.count("r")) o.distortion = Distortion{p.at("r"), get_or(p, "td_ns", 10.0)};
             if (p.count("filter_mhz")) o.filter_mhz = p.at("filter_mhz") > 0 ? std::optional(p.at("filter_mhz")) : std::nullopt;
             if (p.count("m_max")) o.m_max = static_cast<int>(p.at("m_max"));
             const GateResult g = optimize_pulse(CircuitModel(s), get_or(p, "tg_ns", ctx.tg_ns), o);
             return std::vector<double>{g.report.epg, g.report.phi_zz, g.report.leakage_total, g.lambdas.at(0)};
           }});

  reg.add({"designmap", "optimized one-component AWP error versus qubit detuning and coupler anharmonicity",
           {"idle_ghz", "epg"}, [ctx](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"delta12_mhz", "tg_ns"});
             const DesignPoint d = design_point(get_or(p, "delta12_mhz", 600.0), get_or(p, "alphac_mhz", -300.0),
                                                get_or(p, "tg_ns", ctx.tg_ns), ctx.gate);
             if (!d.error.empty()) throw NumericalError(d.error);
             return std::vector<double>{d.idle_ghz, d.epg};
           }});

  reg.add({"locus", "|zeta| at fixed couplings versus qubit-coupler detuning and direct coupling",
           {"abs_zeta_mhz", "g_eff_mhz"}, [](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"delta12_mhz", "delta1c_mhz", "g12_mhz", "g1c_mhz", "g2c_mhz"});
             FixedCouplingParams f;
             f.delta12_mhz = get_or(p, "delta12_mhz", 600.0);
             f.g12_mhz = get_or(p, "g12_mhz", 0.0);
             f.g1c_mhz = get_or(p, "g1c_mhz", 120.0);
             f.g2c_mhz = get_or(p, "g2c_mhz", 100.0);
             f.alphac_mhz = get_or(p, "alphac_mhz", -300.0);
             const double wc = f.omega1_ghz - get_or(p, "delta1c_mhz", -1500.0) * 1e-3;
             const CircuitSpec s = fixed_coupling_circuit(f, wc);
             const auto z = pointwise_zeta(CircuitModel(s), wc);
             if (!z) throw TrackingError("computational states are not dispersive at this point");
             return std::vector<double>{std::abs(rad_to_mhz(*z)), rad_to_mhz(effective_coupling(s, wc))};
           }});

  reg.add({"noise_rates", "transition and dephasing rates (1/s) at one coupler bias",
           {"gamma_ss", "gamma_sl", "gamma_phi_100", "gamma_phi_001", "gamma_phi_101"},
           [ctx](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"omega_c_ghz"});
             const CircuitSpec s = with_overrides(ctx.circuit, p);
             const double w = get_or(p, "omega_c_ghz", s.idle_ghz.value_or(0.0));
             const CircuitModel model(s);
             const double idle = s.idle_ghz.value_or(w);
             const RateCurves c = rate_curves(model, ctx.noise, {std::min(w, idle), std::max(w, idle) + 1e-6});
             const RatePoint r = c.at(w);
             return std::vector<double>{r.gamma_ss * 1e9, r.gamma_sl * 1e9, r.gamma_phi[1] * 1e9,
                                        r.gamma_phi[0] * 1e9, r.gamma_phi[2] * 1e9};
           }});

  reg.add({"stray", "CZ (x) I error of the five-mode circuit versus stray coupling (stray_kind 1=qq 2=cc 3=qc)",
           {"epg", "leakage_total"}, [ctx](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"stray_mhz", "stray_kind", "tg_ns"});
             const int k = static_cast<int>(get_or(p, "stray_kind", 3.0));
             if (k < 0 || k > 3) throw ConfigError("stray_kind must be 0..3");
             const auto rows = stray_scan(FiveModeOptions{}, {static_cast<StrayKind>(k)}, {get_or(p, "stray_mhz", 0.0)},
                                          get_or(p, "tg_ns", ctx.tg_ns), ctx.gate);
             return std::vector<double>{rows.front().epg, rows.front().leakage};
           }});

  reg.add({"perturbation", "exact, fourth-order and simplified ZZ at fixed couplings",
           {"zeta_exact_mhz", "zeta_generic_mhz", "zeta_simplified_mhz", "nu"},
           [](const SweepPoint& p, std::uint64_t) {
             check_keys(p, {"delta12_mhz", "omega_c_ghz", "g12_mhz"});
             FixedCouplingParams f;
             f.delta12_mhz = get_or(p, "delta12_mhz", 600.0);
             f.alphac_mhz = get_or(p, "alphac_mhz", -300.0);
             const auto rows = perturbation_grid(f, {get_or(p, "omega_c_ghz", 7.5)}, {get_or(p, "g12_mhz", 0.0)});
             const auto& r = rows.front();
             return std::vector<double>{r.zeta_exact_mhz, r.zeta_generic_mhz, r.zeta_simplified_mhz, r.nu};
           }});
  return reg;
}

}  // namespace czpulse
