#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "czpulse/config.hpp"
#include "czpulse/errors.hpp"

using namespace czpulse;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ExplicitCircuit) {
  const RunConfig c = parse_config(R"(
circuit:
  modes:
    - {label: Q1, freq_ghz: 6.0, anh_ghz: -0.25, levels: 3}
    - {label: C, anh_ghz: -0.3, levels: 3, tunable: true}
    - {label: Q2, freq_ghz: 5.4, anh_ghz: -0.25, levels: 3}
  couplings:
    - {pair: [0, 1], rho: 0.018}
    - {pair: [1, 2], rho: 0.018}
  idle_ghz: 7.87
spectrum: {lo_ghz: 7.0, hi_ghz: 8.0, points: 11}
)");
  const CircuitSpec& s = c.require_circuit();
  EXPECT_EQ(s.modes.size(), 3u);
  EXPECT_EQ(s.coupler_index, 1);
  EXPECT_EQ(s.qubit_indices, (std::vector<int>{0, 2}));
  EXPECT_DOUBLE_EQ(s.coupling_rho(1, 2), 0.018);
  EXPECT_DOUBLE_EQ(*s.idle_ghz, 7.87);
  ASSERT_TRUE(c.spectrum);
  EXPECT_EQ(c.spectrum->points, 11u);
  EXPECT_EQ(c.spectrum->max_photons, 2);
}

TEST(Config, PresetsPulseNoiseAndGrids) {
  const RunConfig c = parse_config(R"(
circuit: gate
pulse: {kind: fourier, tg_ns: 40, mmax: 2, lambdas: [-0.1, 0.01], distortion: [0.05, 10], dt_ns: 0.02}
noise: {preset: reference, sigma_uphi0: 3}
optimizer: {max_evals: 100, restarts: 2}
gate_times_ns: {lo: 20, hi: 40, points: 5}
sweep: {experiment: zeta, axes: {omega_c_ghz: [7.0, 7.5]}, seed: 3}
stray: {kinds: [qc], strengths_mhz: [0, 1], reoptimize: false}
)");
  EXPECT_EQ(c.require_circuit().modes[0].levels, gate_circuit().modes[0].levels);
  EXPECT_EQ(c.pulse.kind, PulseKind::fourier);
  EXPECT_EQ(c.pulse.lambdas, (std::vector<double>{-0.1, 0.01}));
  ASSERT_TRUE(c.pulse.distortion);
  EXPECT_DOUBLE_EQ(c.pulse.distortion->delay_ns, 10.0);
  ASSERT_TRUE(c.noise);
  EXPECT_DOUBLE_EQ(c.noise->sigma_uphi0, 3.0);
  EXPECT_DOUBLE_EQ(c.noise->flux_a_uphi0sq, 100.0);
  EXPECT_EQ(c.gate_times_ns, (std::vector<double>{20, 25, 30, 35, 40}));
  EXPECT_EQ(c.sweep->seed, 3u);
  EXPECT_EQ(c.stray.kinds, (std::vector<StrayKind>{StrayKind::qubit_coupler}));
  EXPECT_FALSE(c.stray.reoptimize);
  const GateOptions o = c.gate_options();
  EXPECT_EQ(o.m_max, 2);
  EXPECT_EQ(o.optimizer.restarts, 2);
  EXPECT_EQ(o.initial_lambdas, c.pulse.lambdas);
}

TEST(Config, ErrorsCarryLineAndColumn) {
  EXPECT_EQ(error_of("circuit: gate\npulse:\n  kind: awp\n  colour: red\n").rfind("cfg.yaml:4:3: unknown key 'colour'", 0),
            0u);
  EXPECT_NE(error_of("pulse: {tg_ns: fast}\n").find("cfg.yaml:1:16: expected a number"), std::string::npos);
  EXPECT_NE(error_of("spectrum: {lo_ghz: 8, hi_ghz: 7}\n").find("spectrum range is empty"), std::string::npos);
  EXPECT_NE(error_of("circuit: nowhere\n").find("unknown circuit preset"), std::string::npos);
  EXPECT_NE(error_of("pulse: [1, 2\n").find("cfg.yaml:"), std::string::npos);
  EXPECT_NE(error_of("banana: 1\n").find("unknown key 'banana'"), std::string::npos);
  EXPECT_NE(error_of("optimizer: {restarts: 0}\n").find("restarts"), std::string::npos);
  EXPECT_NE(error_of("circuit: gate\nnoise: {t1_us: [1, 2]}\n").find("t1_us lists 2 values"), std::string::npos);
}

TEST(Config, CircuitValidationIsReported) {
  const std::string two_tunable = R"(
circuit:
  modes:
    - {freq_ghz: 6.0, tunable: true}
    - {freq_ghz: 6.0, tunable: true}
)";
  EXPECT_FALSE(error_of(two_tunable).empty());
  EXPECT_THROW(load_config("/nonexistent/file.yaml"), ConfigError);
  EXPECT_THROW(RunConfig{}.require_circuit(), ConfigError);
}

TEST(Config, ShippedConfigurationsParse) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(CZPULSE_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 5u);
}

TEST(Output, CsvQuotingAndManifest) {
  const fs::path dir = fs::temp_directory_path() / "czpulse_test_config";
  fs::create_directories(dir);
  write_csv((dir / "t.csv").string(), {"a", "b"}, {{"1", "x,y"}, {"2", "say \"hi\""}});
  EXPECT_EQ(slurp(dir / "t.csv"), "a,b\n1,\"x,y\"\n2,\"say \"\"hi\"\"\"\n");

  RunManifest m{"cfg.yaml", "gate", dir.string(), 17, tool_version(), utc_timestamp(), {"gate.csv"}};
  write_manifest(m);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j["seed"], 17);
  EXPECT_EQ(j["experiment"], "gate");
  EXPECT_EQ(j["outputs"][0], "gate.csv");
  EXPECT_EQ(j["timestamp"].get<std::string>().size(), 20u);
  fs::remove_all(dir);
}
