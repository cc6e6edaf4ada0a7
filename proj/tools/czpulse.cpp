#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "czpulse/config.hpp"
#include "czpulse/errors.hpp"
#include "czpulse/experiments.hpp"
#include "czpulse/perturbation.hpp"
#include "czpulse/spectrum.hpp"
#include "czpulse/units.hpp"

namespace fs = std::filesystem;
using namespace czpulse;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct GateFlags {
  std::optional<double> tg_ns;
  std::string kind;
  std::optional<int> m_max;
  std::vector<double> lambdas;
  std::optional<double> filter_mhz;
  std::string distort;
  std::vector<std::string> deviations;
};

struct RangeFlags {
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<std::size_t> points;
};

std::string num(double v) { return format_number(v); }

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("czpulse");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("CZPULSE_LOG");
  const std::string level = env ? env : "error";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else {
    spdlog::set_level(spdlog::level::err);
    throw ConfigError("CZPULSE_LOG must be one of error, info, debug (got '" + level + "')");
  }
}

class Run {
 public:
  Run(const Common& c, std::string experiment) : common_(c), experiment_(std::move(experiment)) {
    config_ = load_config(c.config);
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out)) throw ConfigError("cannot create output directory " + c.out);
  }

  const RunConfig& config() const { return config_; }
  RunConfig& config() { return config_; }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    write_csv((fs::path(common_.out) / name).string(), header, rows);
    outputs_.push_back(name);
  }

  void finish(const std::string& experiment = {}) {
    RunManifest m;
    m.config_path = common_.config;
    m.experiment = experiment.empty() ? experiment_ : experiment;
    m.output_dir = common_.out;
    m.seed = common_.seed;
    m.tool_version = tool_version();
    m.timestamp = utc_timestamp();
    m.outputs = outputs_;
    write_manifest(m);
  }

  int workers() const {
    if (common_.workers > 0) return common_.workers;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }

 private:
  Common common_;
  std::string experiment_;
  RunConfig config_;
  std::vector<std::string> outputs_;
};

std::vector<double> range_grid(const RunConfig& cfg, const RangeFlags& f, double default_lo, double default_hi,
                               std::size_t default_points) {
  double lo = cfg.spectrum ? cfg.spectrum->lo_ghz : default_lo;
  double hi = cfg.spectrum ? cfg.spectrum->hi_ghz : default_hi;
  std::size_t n = cfg.spectrum ? cfg.spectrum->points : default_points;
  if (f.lo) lo = *f.lo;
  if (f.hi) hi = *f.hi;
  if (f.points) n = *f.points;
  if (!(hi > lo) || n < 2) throw ConfigError("empty omega_c range (need hi > lo and at least 2 points)");
  return linspace(lo, hi, n);
}

double idle_of(const CircuitSpec& s) {
  if (!s.idle_ghz) throw ConfigError("the circuit has no idle_ghz");
  return *s.idle_ghz;
}

// ---------------------------------------------------------------- commands

int cmd_spectrum(const Common& c, const RangeFlags& rf) {
  Run run(c, "spectrum");
  const CircuitSpec& spec = run.config().require_circuit();
  const double idle = spec.idle_ghz.value_or(7.0);
  const auto grid = range_grid(run.config(), rf, idle - 2.5, idle + 0.3, 281);
  const CircuitModel model(spec);
  const int photons = run.config().spectrum ? run.config().spectrum->max_photons : 2;
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : tracked_spectrum(model, grid, photons)) rows.push_back({num(r.omega_c_ghz), r.label, num(r.energy_ghz)});
  run.csv("spectrum.csv", {"omega_c_ghz", "label", "energy_ghz"}, rows);
  const ZZCurve z = zz_curve(model, grid);
  rows.clear();
  for (std::size_t k = 0; k < z.omega_c_ghz.size(); ++k) {
    rows.push_back({num(z.omega_c_ghz[k]), num(z.zeta_mhz[k]), num(z.g_eff_mhz[k]),
                    z.d_divergent[k] ? "inf" : num(z.d_factor[k])});
  }
  run.csv("zeta.csv", {"omega_c_ghz", "zeta_mhz", "g_eff_mhz", "d_factor"}, rows);
  run.finish();
  return 0;
}

int cmd_gate(const Common& c, const GateFlags& gf) {
  Run run(c, "gate");
  const RunConfig& cfg = run.config();
  const CircuitSpec nominal = cfg.require_circuit();
  CircuitSpec spec = nominal;
  for (const auto& d : gf.deviations) spec = apply_deviation(spec, parse_deviation(d));
  GateOptions o = cfg.gate_options();
  if (!gf.kind.empty()) o.kind = pulse_kind_from_string(gf.kind);
  if (gf.m_max) o.m_max = *gf.m_max;
  if (gf.filter_mhz) o.filter_mhz = *gf.filter_mhz > 0.0 ? gf.filter_mhz : std::nullopt;
  if (!gf.distort.empty()) {
    const auto comma = gf.distort.find(',');
    if (comma == std::string::npos) throw ConfigError("--distort expects r,td_ns");
    try {
      o.distortion = Distortion{std::stod(gf.distort.substr(0, comma)), std::stod(gf.distort.substr(comma + 1))};
    } catch (const std::exception&) {
      throw ConfigError("--distort expects two numbers r,td_ns");
    }
  }
  if (!gf.lambdas.empty()) o.initial_lambdas = gf.lambdas;
  const bool evaluate_only = !gf.lambdas.empty() || !cfg.pulse.lambdas.empty();
  if (evaluate_only) o.m_max = static_cast<int>(o.initial_lambdas.size());
  if (!o.idle_ghz) o.idle_ghz = idle_of(nominal);

  std::vector<double> tgs = cfg.gate_times_ns;
  if (gf.tg_ns || tgs.empty()) tgs = {gf.tg_ns.value_or(cfg.pulse.tg_ns)};

  const CircuitModel nominal_model(nominal);
  const CircuitModel model(spec);
  const auto table = make_table(nominal_model, *o.idle_ghz, o.table);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::string>> wave;
  for (double tg : tgs) {
    const GateResult g = evaluate_only ? evaluate_gate(model, *table, tg, o.initial_lambdas, o)
                                       : optimize_pulse(model, tg, o, table);
    rows.push_back({num(tg), num(g.report.epg), num(g.report.phi_zz), num(g.report.leakage_total), num(g.report.phi1),
                    num(g.report.phi2)});
    std::printf("epg=%s phi_zz=%s\n", num(g.report.epg).c_str(), num(g.report.phi_zz).c_str());
    if (wave.empty()) {
      for (std::size_t k = 0; k < g.pulse.omega_c_ghz.size(); ++k) {
        wave.push_back({num(static_cast<double>(k) * g.pulse.dt_ns), num(g.pulse.omega_c_ghz[k])});
      }
    }
  }
  run.csv("gate.csv", {"tg_ns", "epg", "phi_zz_rad", "leakage_total", "phi1_rad", "phi2_rad"}, rows);
  run.csv("waveform.csv", {"t_ns", "omega_c_ghz"}, wave);
  run.finish();
  return 0;
}

RegistryContext registry_context(const RunConfig& cfg) {
  RegistryContext ctx;
  if (cfg.circuit) ctx.circuit = *cfg.circuit;
  ctx.gate = cfg.gate_options();
  if (cfg.noise) ctx.noise = *cfg.noise;
  ctx.tg_ns = cfg.pulse.tg_ns;
  return ctx;
}

int cmd_designmap(const Common& c) {
  Run run(c, "designmap");
  const RunConfig& cfg = run.config();
  if (!cfg.designmap) throw ConfigError(cfg.path + ": designmap needs a 'designmap' block");
  SweepJob job;
  job.experiment = "designmap";
  job.axes = {{"delta12_mhz", cfg.designmap->delta12_mhz},
              {"alphac_mhz", cfg.designmap->alphac_mhz},
              {"tg_ns", {cfg.designmap->tg_ns}}};
  job.seed = c.seed;
  job.workers = run.workers();
  const ResultTable t = run_sweep(job, default_registry(registry_context(cfg)));
  run.csv("designmap.csv", t.columns, t.rows);
  run.finish();
  return 0;
}

int cmd_sweep(const Common& c) {
  Run run(c, "sweep");
  const RunConfig& cfg = run.config();
  if (!cfg.sweep) throw ConfigError(cfg.path + ": sweep needs a 'sweep' block");
  SweepJob job = *cfg.sweep;
  if (c.seed) job.seed = c.seed;
  if (c.workers > 0) job.workers = c.workers;
  const ResultTable t = run_sweep(job, default_registry(registry_context(cfg)));
  run.csv("sweep.csv", t.columns, t.rows);
  run.finish(job.experiment);
  return 0;
}

int cmd_stray(const Common& c) {
  Run run(c, "stray");
  const RunConfig& cfg = run.config();
  FiveModeOptions f;
  f.truncation = cfg.stray.truncation;
  const auto rows = stray_scan(f, cfg.stray.kinds, cfg.stray.strengths_mhz, cfg.pulse.tg_ns, cfg.gate_options(),
                               cfg.stray.reoptimize);
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    out.push_back({to_string(r.kind), num(r.stray_mhz), num(r.epg), num(r.leakage), num(r.unitarity_error)});
  }
  run.csv("stray.csv", {"kind", "stray_mhz", "epg", "leakage_total", "unitarity_error"}, out);
  run.finish();
  return 0;
}

int cmd_noise(const Common& c, const RangeFlags& rf) {
  Run run(c, "noise");
  const RunConfig& cfg = run.config();
  const CircuitSpec& spec = cfg.require_circuit();
  if (!cfg.noise) throw ConfigError(cfg.path + ": noise needs a 'noise' block");
  const NoiseSpec& noise = *cfg.noise;
  noise.validate(spec.modes.size());
  const double idle = idle_of(spec);
  const auto grid = range_grid(cfg, rf, idle - 2.0, idle, 201);
  const CircuitModel model(spec);
  const RateCurves curves = rate_curves(model, noise, grid);
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : curves.points) {
    rows.push_back({num(p.omega_c_ghz), num(p.gamma_ss * 1e9), num(p.gamma_sl * 1e9), num(p.gamma_phi[1] * 1e9),
                    num(p.gamma_phi[0] * 1e9), num(p.gamma_phi[2] * 1e9)});
  }
  run.csv("rates.csv", {"omega_c_ghz", "gamma_ss", "gamma_sl", "gamma_phi_100", "gamma_phi_001", "gamma_phi_101"},
          rows);
  if (!cfg.gate_times_ns.empty()) {
    GateOptions o = cfg.gate_options();
    if (!o.idle_ghz) o.idle_ghz = idle;
    const auto table = make_table(model, *o.idle_ghz, o.table);
    rows.clear();
    for (double tg : cfg.gate_times_ns) {
      const GateResult g = optimize_pulse(model, tg, o, table);
      const RBErrorBreakdown e = rb_error(model, noise, g.pulse);
      rows.push_back({num(tg), num(g.report.epg), num(e.transition_ss), num(e.transition_sl), num(e.transition),
                      num(e.dephasing), num(e.total)});
    }
    run.csv("noise_errors.csv",
            {"tg_ns", "coherent_epg", "eps_tr_ss", "eps_tr_sl", "eps_tr", "eps_phi", "eps_total"}, rows);
  }
  run.finish();
  return 0;
}

int cmd_schemes(const Common& c) {
  Run run(c, "schemes");
  const auto curves = scheme_curves(run.config().scheme_samples);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::string>> summary;
  for (const auto& s : curves) {
    for (std::size_t k = 0; k < s.curve.omega_c_ghz.size(); ++k) {
      rows.push_back({s.name, num(s.curve.omega_c_ghz[k]), num(s.curve.zeta_mhz[k]),
                      s.curve.d_divergent[k] ? "inf" : num(s.curve.d_factor[k])});
    }
    summary.push_back({s.name, num(s.idle_ghz), num(s.max_abs_zeta_mhz)});
  }
  run.csv("schemes.csv", {"scheme", "omega_c_ghz", "zeta_mhz", "d_factor"}, rows);
  run.csv("schemes_summary.csv", {"scheme", "idle_ghz", "max_abs_zeta_mhz"}, summary);
  run.finish();
  return 0;
}

int cmd_perturb(const Common& c, const RangeFlags& rf) {
  Run run(c, "perturb");
  const CircuitSpec& spec = run.config().require_circuit();
  const double idle = spec.idle_ghz.value_or(7.5);
  const auto grid = range_grid(run.config(), rf, idle - 1.0, idle + 0.3, 131);
  const CircuitModel model(spec);
  const ZZCurve exact = zz_curve(model, grid);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < exact.omega_c_ghz.size(); ++k) {
    const double w = exact.omega_c_ghz[k];
    double pert = std::numeric_limits<double>::quiet_NaN();
    double nu = pert;
    try {
      const PerturbativeResult p = zeta_fourth_order_generic(spec, w);
      pert = rad_to_mhz(p.zeta_total);
      nu = p.nu;
    } catch (const DomainError& e) {
      spdlog::debug("no perturbative value at {} GHz: {}", w, e.what());
    }
    rows.push_back({num(w), num(pert), num(exact.zeta_mhz[k]), num(nu)});
  }
  run.csv("perturbation.csv", {"omega_c_ghz", "zeta_pert_mhz", "zeta_exact_mhz", "nu"}, rows);
  run.finish();
  return 0;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "YAML configuration file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory (created when missing)")->required();
  sub->add_option("--seed", c.seed, "random seed for stochastic experiments");
  sub->add_option("--workers", c.workers, "sweep workers (default: logical cores)")->check(CLI::PositiveNumber);
}

void add_range(CLI::App* sub, RangeFlags& r) {
  sub->add_option("--lo", r.lo, "lowest coupler frequency, GHz");
  sub->add_option("--hi", r.hi, "highest coupler frequency, GHz");
  sub->add_option("--points", r.points, "grid points");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"czpulse: coupler-assisted adiabatic CZ gate toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  app.footer("Environment: CZPULSE_LOG=error|info|debug (log level, default error).\n"
             "Exit codes: 0 success, 2 usage or configuration error, 3 numerical or calibration failure.\n"
             "Every command writes manifest.json next to its CSV outputs.");

  Common common;
  GateFlags gate;
  RangeFlags range;

  auto* spectrum = app.add_subcommand("spectrum", "tracked spectrum and ZZ strength versus coupler frequency");
  spectrum->footer("spectrum.csv: omega_c_ghz,label,energy_ghz\nzeta.csv: omega_c_ghz,zeta_mhz,g_eff_mhz,d_factor");
  add_common(spectrum, common);
  add_range(spectrum, range);

  auto* gatecmd = app.add_subcommand("gate", "optimize (or evaluate) a CZ pulse and print epg=<val> phi_zz=<val>");
  gatecmd->footer("gate.csv: tg_ns,epg,phi_zz_rad,leakage_total,phi1_rad,phi2_rad\nwaveform.csv: t_ns,omega_c_ghz");
  add_common(gatecmd, common);
  gatecmd->add_option("--tg", gate.tg_ns, "gate time, ns");
  gatecmd->add_option("--kind", gate.kind, "pulse family: awp, fourier, netzero, constant");
  gatecmd->add_option("--mmax", gate.m_max, "number of lambda components");
  gatecmd->add_option("--lambda", gate.lambdas, "fixed lambdas (skips the optimizer)");
  gatecmd->add_option("--filter", gate.filter_mhz, "Gaussian filter bandwidth, MHz (0 disables)");
  gatecmd->add_option("--distort", gate.distort, "line distortion r,td_ns");
  gatecmd->add_option("--deviate", gate.deviations, "parameter deviation param,delta (repeatable), e.g. omega1,+10MHz");

  auto* designmap = app.add_subcommand("designmap", "optimized one-component AWP error over (delta12, alpha_c)");
  designmap->footer("designmap.csv: delta12_mhz,alphac_mhz,tg_ns,idle_ghz,epg,error");
  add_common(designmap, common);

  auto* stray = app.add_subcommand("stray", "CZ (x) I error of the five-mode circuit versus stray coupling");
  stray->footer("stray.csv: kind,stray_mhz,epg,leakage_total,unitarity_error");
  add_common(stray, common);

  auto* noise = app.add_subcommand("noise", "transition and dephasing rates, optional error budget per gate time");
  noise->footer("rates.csv (1/s): omega_c_ghz,gamma_ss,gamma_sl,gamma_phi_100,gamma_phi_001,gamma_phi_101\n"
                "noise_errors.csv: tg_ns,coherent_epg,eps_tr_ss,eps_tr_sl,eps_tr,eps_phi,eps_total");
  add_common(noise, common);
  add_range(noise, range);

  auto* schemes = app.add_subcommand("schemes", "ZZ and D curves of the CAQ-D, CAQ-U, CBQ-U and CBQ-D schemes");
  schemes->footer("schemes.csv: scheme,omega_c_ghz,zeta_mhz,d_factor\nschemes_summary.csv: scheme,idle_ghz,max_abs_zeta_mhz");
  add_common(schemes, common);

  auto* perturb = app.add_subcommand("perturb", "fourth-order perturbative ZZ against exact diagonalization");
  perturb->footer("perturbation.csv: omega_c_ghz,zeta_pert_mhz,zeta_exact_mhz,nu");
  add_common(perturb, common);
  add_range(perturb, range);

  auto* sweep = app.add_subcommand("sweep", "grid sweep of a registered experiment (see the 'sweep' config block)");
  sweep->footer("sweep.csv: <axes>,<experiment outputs>,error\n"
                "experiments: zeta, gate, designmap, locus, noise_rates, stray, perturbation");
  add_common(sweep, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    configure_logging();
    if (*spectrum) return cmd_spectrum(common, range);
    if (*gatecmd) return cmd_gate(common, gate);
    if (*designmap) return cmd_designmap(common);
    if (*stray) return cmd_stray(common);
    if (*noise) return cmd_noise(common, range);
    if (*schemes) return cmd_schemes(common);
    if (*perturb) return cmd_perturb(common, range);
    if (*sweep) return cmd_sweep(common);
  } catch (const Error& e) {
    std::cerr << "czpulse: " << e.kind() << " error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "czpulse: error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
