#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "czpulse/dynamics.hpp"
#include "czpulse/model.hpp"
#include "czpulse/pulse.hpp"

namespace czpulse {

struct OptimizerOptions {
  int max_evals = 400;
  int restarts = 5;
  double simplex_scale = 0.1;  // initial spread relative to |x_i|
  double tol = 1e-9;           // relative spread of simplex objective values
  double xtol = 1e-9;          // relative simplex diameter

  void validate() const;  // ConfigError unless max_evals >= 50, restarts >= 1, tol > 0
};

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimizeResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  std::vector<double> best_history;  // best value after each iteration
};

// Reflect / expand / contract / shrink with coefficients 1, 2, 0.5, 0.5.
// Non-finite objective values count as +infinity.
OptimizeResult nelder_mead(const Objective& objective, const std::vector<double>& x0,
                           const OptimizerOptions& options = {});

struct GateOptions {
  PulseKind kind = PulseKind::awp;
  int m_max = 1;
  double dt_ns = 0.01;
  std::optional<double> idle_ghz;  // defaults to the circuit idle point
  std::optional<double> filter_mhz;
  std::optional<Distortion> distortion;
  bool distort_before_filter = true;
  std::pair<int, int> zz_pair{0, 1};
  PropagationOptions propagation;
  OptimizerOptions optimizer;
  std::optional<TableOptions> table;
  // Starting parameters; empty means a calibrated single-component guess.
  std::vector<double> initial_lambdas;
};

struct GateResult {
  std::vector<double> lambdas;
  PulseShape pulse;
  GateReport report;
  int evals = 0;
};

// Adiabatic table for the circuit at `idle_ghz` over the default (or given) span.
std::shared_ptr<const AdiabaticTable> make_table(const CircuitModel& model, double idle_ghz,
                                                 const std::optional<TableOptions>& range = std::nullopt);

// Waveform for `lambdas` including distortion and filtering.
PulseShape build_pulse(const CircuitModel& model, const AdiabaticTable& table, double gate_time_ns,
                       const std::vector<double>& lambdas, const GateOptions& options);

GateResult evaluate_gate(const CircuitModel& model, const AdiabaticTable& table, double gate_time_ns,
                         const std::vector<double>& lambdas, const GateOptions& options);

// Single-component lambda giving a conditional phase of pi (modulo 2 pi).
std::vector<double> calibrated_guess(const CircuitModel& model, const AdiabaticTable& table, double gate_time_ns,
                                     const GateOptions& options);

// Minimizes the gate error over lambda_1..lambda_m_max, best of the restarts.
// Throws CalibrationError when no restart yields a finite error.
GateResult optimize_pulse(const CircuitModel& model, double gate_time_ns, const GateOptions& options,
                          std::shared_ptr<const AdiabaticTable> table = nullptr);

// Sweep engine.
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepJob {
  std::string experiment;
  std::vector<SweepAxis> axes;
  std::uint64_t seed = 0;
  int workers = 1;
};

using SweepPoint = std::map<std::string, double>;
using PointFunction = std::function<std::vector<double>(const SweepPoint& point, std::uint64_t seed)>;

struct ExperimentDef {
  std::string id;
  std::string description;
  std::vector<std::string> outputs;
  PointFunction run;
};

class ExperimentRegistry {
 public:
  void add(ExperimentDef def);
  const ExperimentDef& get(const std::string& id) const;  // ConfigError for unknown ids
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, ExperimentDef> defs_;
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t failures = 0;
};

// Cartesian product of the axes (first axis slowest); one row per point with
// the axis values, the experiment outputs and an error tag column.
ResultTable run_sweep(const SweepJob& job, const ExperimentRegistry& registry);

// Stable decimal formatting used in every CSV.
std::string format_number(double value);

}  // namespace czpulse
