#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "czpulse/experiments.hpp"
#include "czpulse/model.hpp"
#include "czpulse/noise.hpp"
#include "czpulse/optimize.hpp"
#include "czpulse/pulse.hpp"

namespace czpulse {

// Run configuration read from a YAML file. Every block is optional; commands
// check for the blocks they need. Parse and validation failures raise
// ConfigError with a "file:line:column: message" prefix.
//
//   circuit:    preset | {modes: [{label, freq_ghz, anh_ghz, levels, tunable}],
//                         couplings: [{pair: [i, j], rho}], qubits, coupler,
//                         flux: {omega_max_ghz, alpha_c_ghz}, max_excitations, idle_ghz}
//   spectrum:   {lo_ghz, hi_ghz, points, max_photons}
//   pulse:      {kind, tg_ns, mmax, lambdas, idle_ghz, filter_mhz, distortion: [r, td_ns], dt_ns}
//   noise:      preset | {t1_us, flux_a_uphi0sq, sigma_uphi0, white_psd_uphi0sq_hz, f_ir_hz, f_uv_hz}
//   optimizer:  {max_evals, restarts, simplex_scale, tol, xtol}
//   sweep:      {experiment, axes: {name: [values] | {lo, hi, points}}, seed, workers}
//   gate_times_ns: [...]
//   designmap:  {delta12_mhz: [...], alphac_mhz: [...], tg_ns}
//   stray:      {kinds: [qq, cc, qc], strengths_mhz: [...], levels, max_excitations, reoptimize}
//   schemes:    {samples}
struct SpectrumRange {
  double lo_ghz = 0.0;
  double hi_ghz = 0.0;
  std::size_t points = 201;
  int max_photons = 2;
};

struct PulseConfig {
  PulseKind kind = PulseKind::awp;
  double tg_ns = 30.0;
  int m_max = 1;
  std::vector<double> lambdas;  // empty: optimize
  std::optional<double> idle_ghz;
  std::optional<double> filter_mhz;
  std::optional<Distortion> distortion;
  double dt_ns = 0.05;
};

struct DesignMapConfig {
  std::vector<double> delta12_mhz;
  std::vector<double> alphac_mhz;
  double tg_ns = 30.0;
};

struct StrayConfig {
  std::vector<StrayKind> kinds{StrayKind::qubit_qubit, StrayKind::coupler_coupler, StrayKind::qubit_coupler};
  std::vector<double> strengths_mhz{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  Truncation truncation{3, 5};
  bool reoptimize = true;
};

struct RunConfig {
  std::string path;
  std::optional<CircuitSpec> circuit;
  std::optional<SpectrumRange> spectrum;
  PulseConfig pulse;
  std::optional<NoiseSpec> noise;
  OptimizerOptions optimizer;
  std::optional<SweepJob> sweep;
  std::vector<double> gate_times_ns;
  std::optional<DesignMapConfig> designmap;
  StrayConfig stray;
  std::size_t scheme_samples = 241;

  const CircuitSpec& require_circuit() const;  // ConfigError when absent
  GateOptions gate_options() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& name = "<string>");

// Named circuits: reference, gate, coupler-free, CAQ-D, CAQ-U, CBQ-U, CBQ-D.
CircuitSpec circuit_preset(const std::string& name);

// CSV with one header row; numbers through format_number.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv(const std::string& path, const ResultTable& table);

struct RunManifest {
  std::string config_path;
  std::string experiment;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
  std::vector<std::string> outputs;
};
// Writes <output_dir>/manifest.json.
void write_manifest(const RunManifest& manifest);
std::string tool_version();
std::string utc_timestamp();

}  // namespace czpulse
