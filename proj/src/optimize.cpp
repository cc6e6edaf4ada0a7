#include "czpulse/optimize.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "czpulse/errors.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const std::vector<double>& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

std::vector<double> axpy(const std::vector<double>& a, const std::vector<double>& b, double t) {
  // a + t (b - a)
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double pulse_idle(const CircuitModel& model, const GateOptions& options) {
  if (options.idle_ghz) return *options.idle_ghz;
  if (model.spec().idle_ghz) return *model.spec().idle_ghz;
  throw ConfigError("gate simulation needs an idle coupler frequency");
}

double pulse_direction(const CircuitSpec& spec, double idle_ghz) {
  double qmax = 0.0;
  for (int q : spec.qubit_indices) {
    if (q != spec.coupler_index) qmax = std::max(qmax, spec.modes[q].frequency_ghz);
  }
  return idle_ghz > qmax ? -1.0 : 1.0;
}

}  // namespace

void OptimizerOptions::validate() const {
  if (max_evals < 50) throw ConfigError("optimizer max_evals must be >= 50");
  if (restarts < 1) throw ConfigError("optimizer restarts must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("optimizer tol must be > 0");
  if (!(xtol > 0.0)) throw ConfigError("optimizer xtol must be > 0");
  if (!(simplex_scale > 0.0)) throw ConfigError("optimizer simplex_scale must be > 0");
}

OptimizeResult nelder_mead(const Objective& objective, const std::vector<double>& x0,
                           const OptimizerOptions& options) {
  options.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw ConfigError("nelder_mead needs at least one parameter");
  OptimizeResult res;
  const double f0 = safe_eval(objective, x0);
  res.evals = 1;
  if (!std::isfinite(f0)) throw NumericalError("objective is not finite at the starting point");

  double ref = 0.0;
  for (double v : x0) ref = std::max(ref, std::abs(v));
  if (ref == 0.0) ref = 1.0;
  std::vector<std::vector<double>> simplex{x0};
  std::vector<double> fv{f0};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = x0;
    x[i] += options.simplex_scale * (x0[i] != 0.0 ? std::abs(x0[i]) : ref);
    simplex.push_back(x);
    fv.push_back(safe_eval(objective, x));
    ++res.evals;
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (std::size_t k : order) {
      s2.push_back(simplex[k]);
      f2.push_back(fv[k]);
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };

  sort_simplex();
  while (res.evals < options.max_evals) {
    res.best_history.push_back(fv.front());
    const double spread = fv.back() - fv.front();
    double diam = 0.0;
    double scale = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        diam = std::max(diam, std::abs(simplex[k][i] - simplex[0][i]));
        scale = std::max(scale, std::abs(simplex[0][i]));
      }
    }
    if (std::isfinite(spread) && spread <= options.tol * std::abs(fv.front()) + 1e-300 &&
        diam <= options.xtol * std::max(scale, 1e-12)) {
      break;
    }
    if (diam <= 1e-15 * std::max(scale, 1.0)) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / static_cast<double>(n);

    const std::vector<double> xr = axpy(centroid, simplex[n], -1.0);
    const double fr = safe_eval(objective, xr);
    ++res.evals;
    if (fr < fv.front()) {
      const std::vector<double> xe = axpy(centroid, simplex[n], -2.0);
      const double fe = safe_eval(objective, xe);
      ++res.evals;
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      const std::vector<double> xc = outside ? axpy(centroid, xr, 0.5) : axpy(centroid, simplex[n], 0.5);
      const double fc = safe_eval(objective, xc);
      ++res.evals;
      if (fc < (outside ? fr : fv[n])) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          simplex[k] = axpy(simplex[0], simplex[k], 0.5);
          fv[k] = safe_eval(objective, simplex[k]);
          ++res.evals;
        }
      }
    }
    sort_simplex();
  }
  res.x = simplex.front();
  res.f = fv.front();
  res.best_history.push_back(res.f);
  return res;
}

std::shared_ptr<const AdiabaticTable> make_table(const CircuitModel& model, double idle_ghz,
                                                 const std::optional<TableOptions>& range) {
  TableOptions opt = range ? *range : default_table_range(model.spec(), idle_ghz);
  if (model.spec().flux_map) opt.hi_ghz = std::min(opt.hi_ghz, model.spec().flux_map->omega_max_ghz);
  return std::make_shared<const AdiabaticTable>(build_adiabatic_table(model, idle_ghz, opt));
}

PulseShape build_pulse(const CircuitModel& model, const AdiabaticTable& table, double gate_time_ns,
                       const std::vector<double>& lambdas, const GateOptions& options) {
  const double idle = pulse_idle(model, options);
  PulseShape p;
  switch (options.kind) {
    case PulseKind::awp:
      p = awp_generate(table, gate_time_ns, lambdas, idle, options.dt_ns);
      break;
    case PulseKind::fourier:
      p = fourier_generate(gate_time_ns, lambdas, idle, options.dt_ns);
      break;
    case PulseKind::netzero:
      p = netzero(model.spec(), table, 0.5 * gate_time_ns, lambdas, idle, options.dt_ns);
      break;
    case PulseKind::constant:
      throw ConfigError("constant pulses have no shape parameters to optimize");
  }
  auto distort = [&] {
    if (options.distortion && options.distortion->r != 0.0) {
      p = apply_distortion(p, options.distortion->r, options.distortion->delay_ns);
    }
  };
  auto filter = [&] {
    if (options.filter_mhz) p = apply_filter(p, *options.filter_mhz);
  };
  if (options.distort_before_filter) {
    distort();
    filter();
  } else {
    filter();
    distort();
  }
  return p;
}

GateResult evaluate_gate(const CircuitModel& model, const AdiabaticTable& table, double gate_time_ns,
                         const std::vector<double>& lambdas, const GateOptions& options) {
  GateResult r;
  r.lambdas = lambdas;
  r.pulse = build_pulse(model, table, gate_time_ns, lambdas, options);
  const Eigen::MatrixXcd u = propagate(model, r.pulse, options.propagation);
  r.report = computational_unitary(u, model, pulse_idle(model, options), options.zz_pair);
  r.evals = 1;
  return r;
}

std::vector<double> calibrated_guess(const CircuitModel& model, const AdiabaticTable& table, double gate_time_ns,
                                     const GateOptions& options) {
  const double idle = pulse_idle(model, options);
  GateOptions bare = options;
  bare.filter_mhz.reset();
  bare.distortion.reset();
  const PulseFamily family = [&](const std::vector<double>& l) {
    return build_pulse(model, table, gate_time_ns, l, bare);
  };
  const double sign = pulse_direction(model.spec(), idle);
  const Calibration cal = calibrate_conditional_phase(table, family, {sign * 1e-3}, std::numbers::pi);
  return cal.lambdas;
}

GateResult optimize_pulse(const CircuitModel& model, double gate_time_ns, const GateOptions& options,
                          std::shared_ptr<const AdiabaticTable> table) {
  if (options.m_max < 1 || options.m_max > 4) throw ConfigError("m_max must lie in [1, 4]");
  if (!(gate_time_ns > 0.0)) throw ConfigError("gate time must be positive");
  options.optimizer.validate();
  const double idle = pulse_idle(model, options);
  if (!table) table = make_table(model, idle, options.table);

  std::vector<double> start = options.initial_lambdas;
  if (start.empty()) start = calibrated_guess(model, *table, gate_time_ns, options);
  start.resize(static_cast<std::size_t>(options.m_max), 0.0);

  const Objective objective = [&](const std::vector<double>& l) {
    return evaluate_gate(model, *table, gate_time_ns, l, options).report.epg;
  };

  const int restarts = options.optimizer.restarts;
  std::optional<OptimizeResult> best;
  int evals = 0;
  for (int k = 0; k < restarts; ++k) {
    // Log-spaced first-component magnitudes between 0.8x and 1.25x of the start.
    const double t = restarts == 1 ? 0.5 : static_cast<double>(k) / (restarts - 1);
    const double factor = restarts == 1 ? 1.0 : std::exp(std::log(0.8) + t * (std::log(1.25) - std::log(0.8)));
    std::vector<double> x0 = start;
    x0[0] *= factor;
    try {
      OptimizeResult r = nelder_mead(objective, x0, options.optimizer);
      evals += r.evals;
      spdlog::debug("restart {}: epg {:.3e} after {} evals", k, r.f, r.evals);
      if (!best || r.f < best->f) best = std::move(r);
    } catch (const NumericalError& e) {
      spdlog::debug("restart {} skipped: {}", k, e.what());
    }
  }
  if (!best || !std::isfinite(best->f)) {
    throw CalibrationError("no optimizer restart produced a valid gate");
  }
  GateResult out = evaluate_gate(model, *table, gate_time_ns, best->x, options);
  out.evals = evals;
  return out;
}

void ExperimentRegistry::add(ExperimentDef def) {
  const std::string id = def.id;
  defs_[id] = std::move(def);
}

const ExperimentDef& ExperimentRegistry::get(const std::string& id) const {
  auto it = defs_.find(id);
  if (it == defs_.end()) {
    std::string known;
    for (const auto& [k, v] : defs_) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown experiment '" + id + "' (known: " + known + ")");
  }
  return it->second;
}

bool ExperimentRegistry::contains(const std::string& id) const { return defs_.count(id) > 0; }

std::vector<std::string> ExperimentRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : defs_) out.push_back(k);
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

ResultTable run_sweep(const SweepJob& job, const ExperimentRegistry& registry) {
  const ExperimentDef& def = registry.get(job.experiment);
  ResultTable table;
  std::size_t total = 1;
  for (const auto& axis : job.axes) {
    if (axis.name.empty()) throw ConfigError("sweep axis without a name");
    for (double v : axis.values) {
      if (!std::isfinite(v)) throw ConfigError("sweep axis '" + axis.name + "' has a non-finite value");
    }
    if (!std::is_sorted(axis.values.begin(), axis.values.end())) {
      throw ConfigError("sweep axis '" + axis.name + "' must be ascending");
    }
    table.columns.push_back(axis.name);
    total *= axis.values.size();
  }
  for (const auto& o : def.outputs) table.columns.push_back(o);
  table.columns.push_back("error");
  if (job.axes.empty()) total = 0;
  table.rows.resize(total);

  auto point_at = [&](std::size_t index) {
    SweepPoint p;
    std::size_t rem = index;
    for (std::size_t a = job.axes.size(); a-- > 0;) {
      const auto& vals = job.axes[a].values;
      p[job.axes[a].name] = vals[rem % vals.size()];
      rem /= vals.size();
    }
    return p;
  };

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const SweepPoint p = point_at(i);
      std::vector<std::string> row;
      for (const auto& axis : job.axes) row.push_back(format_number(p.at(axis.name)));
      std::string tag;
      std::vector<double> values;
      try {
        values = def.run(p, splitmix64(job.seed ^ splitmix64(i)));
        if (values.size() != def.outputs.size()) throw NumericalError("experiment returned the wrong number of outputs");
      } catch (const Error& e) {
        tag = std::string(e.kind()) + ": " + e.what();
      } catch (const std::exception& e) {
        tag = std::string("error: ") + e.what();
      }
      if (!tag.empty()) {
        ++failures;
        values.assign(def.outputs.size(), std::numeric_limits<double>::quiet_NaN());
        std::replace(tag.begin(), tag.end(), ',', ';');
        std::replace(tag.begin(), tag.end(), '\n', ' ');
      }
      for (double v : values) row.push_back(format_number(v));
      row.push_back(tag);
      table.rows[i] = std::move(row);
    }
  };
  const int workers = std::max(1, std::min<int>(job.workers, static_cast<int>(std::max<std::size_t>(total, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  table.failures = failures;
  return table;
}

}  // namespace czpulse
