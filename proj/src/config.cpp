#include "czpulse/config.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "czpulse/errors.hpp"

#ifndef CZPULSE_VERSION
#define CZPULSE_VERSION "0.1.0"
#endif

namespace czpulse {

namespace {

class Reader {
 public:
  explicit Reader(std::string name) : name_(std::move(name)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const YAML::Mark m = at.Mark();
    std::ostringstream os;
    os << name_;
    if (m.line >= 0) os << ':' << m.line + 1 << ':' << m.column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& n, const std::set<std::string>& keys, const std::string& what) const {
    require_map(n, what);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  double field(const YAML::Node& parent, const std::string& key) const {
    const YAML::Node n = parent[key];
    if (!n) fail(parent, "missing key '" + key + "'");
    return number(n, key);
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, "expected a number for '" + what + "'");
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, "expected a number for '" + what + "', got '" + n.Scalar() + "'");
    }
  }

  double number_or(const YAML::Node& parent, const std::string& key, double fallback) const {
    const YAML::Node n = parent[key];
    return n ? number(n, key) : fallback;
  }

  std::optional<double> optional_number(const YAML::Node& parent, const std::string& key) const {
    const YAML::Node n = parent[key];
    if (!n || n.IsNull()) return std::nullopt;
    return number(n, key);
  }

  long integer(const YAML::Node& n, const std::string& what) const {
    const double v = number(n, what);
    if (v != static_cast<double>(static_cast<long>(v))) fail(n, "expected an integer for '" + what + "'");
    return static_cast<long>(v);
  }

  long integer_or(const YAML::Node& parent, const std::string& key, long fallback) const {
    const YAML::Node n = parent[key];
    return n ? integer(n, key) : fallback;
  }

  bool boolean_or(const YAML::Node& parent, const std::string& key, bool fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, "expected true or false for '" + key + "'");
    }
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, "expected a string for '" + what + "'");
    return n.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& what) const {
    if (!n.IsSequence()) fail(n, "expected a list of numbers for '" + what + "'");
    std::vector<double> out;
    for (const auto& x : n) out.push_back(number(x, what));
    return out;
  }

  // A list, or {lo, hi, points} expanded to an inclusive linear grid.
  std::vector<double> grid(const YAML::Node& n, const std::string& what) const {
    if (n.IsSequence()) return numbers(n, what);
    allow_keys(n, {"lo", "hi", "points"}, what);
    const double lo = field(n, "lo");
    const double hi = field(n, "hi");
    if (!n["points"]) fail(n, "missing key 'points'");
    const long pts = integer(n["points"], "points");
    if (pts < 1) fail(n, "'" + what + "' needs at least one point");
    if (pts == 1) return {lo};
    return linspace(lo, hi, static_cast<std::size_t>(pts));
  }

  // Library validation errors get the location of the offending block.
  template <class F>
  void validated(const YAML::Node& at, F&& check) const {
    try {
      check();
    } catch (const ConfigError& e) {
      fail(at, e.what());
    }
  }

 private:
  std::string name_;
};

CircuitSpec parse_circuit(const Reader& r, const YAML::Node& n) {
  if (n.IsScalar()) {
    CircuitSpec s;
    r.validated(n, [&] { s = circuit_preset(n.Scalar()); });
    return s;
  }
  r.allow_keys(n, {"preset", "modes", "couplings", "qubits", "coupler", "flux", "max_excitations", "idle_ghz"},
               "circuit");
  CircuitSpec s;
  if (n["preset"]) {
    r.validated(n["preset"], [&] { s = circuit_preset(r.text(n["preset"], "preset")); });
    if (n["modes"] || n["couplings"]) r.fail(n, "a circuit preset cannot be combined with modes or couplings");
  } else {
    if (!n["modes"] || !n["modes"].IsSequence()) r.fail(n, "circuit needs a 'modes' list");
    s.qubit_indices.clear();
    for (const auto& m : n["modes"]) {
      r.allow_keys(m, {"label", "freq_ghz", "anh_ghz", "levels", "tunable"}, "mode");
      ModeSpec ms;
      ms.label = m["label"] ? r.text(m["label"], "label") : "M" + std::to_string(s.modes.size());
      ms.tunable = r.boolean_or(m, "tunable", false);
      ms.frequency_ghz = ms.tunable ? r.number_or(m, "freq_ghz", 0.0) : r.field(m, "freq_ghz");
      ms.anharmonicity_ghz = r.number_or(m, "anh_ghz", 0.0);
      ms.levels = static_cast<int>(r.integer_or(m, "levels", 4));
      s.modes.push_back(ms);
    }
    if (n["couplings"]) {
      if (!n["couplings"].IsSequence()) r.fail(n["couplings"], "'couplings' must be a list");
      for (const auto& c : n["couplings"]) {
        r.allow_keys(c, {"pair", "rho"}, "coupling");
        const YAML::Node pair = c["pair"];
        if (!pair || !pair.IsSequence() || pair.size() != 2) r.fail(c, "coupling needs 'pair: [i, j]'");
        s.couplings.push_back({static_cast<int>(r.integer(pair[0], "pair")), static_cast<int>(r.integer(pair[1], "pair")),
                               r.field(c, "rho")});
      }
    }
    int tunable = -1;
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
      if (s.modes[k].tunable) tunable = static_cast<int>(k);
    }
    s.coupler_index = tunable >= 0 ? tunable : 1;
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
      if (!s.modes[k].tunable) s.qubit_indices.push_back(static_cast<int>(k));
    }
    if (s.modes.size() == 2 && tunable >= 0) s.qubit_indices = {0, 1};
  }
  if (n["qubits"]) {
    s.qubit_indices.clear();
    for (double q : r.numbers(n["qubits"], "qubits")) s.qubit_indices.push_back(static_cast<int>(q));
  }
  if (n["coupler"]) s.coupler_index = static_cast<int>(r.integer(n["coupler"], "coupler"));
  if (n["flux"]) {
    const YAML::Node f = n["flux"];
    if (f.IsNull()) {
      s.flux_map.reset();
    } else {
      r.allow_keys(f, {"omega_max_ghz", "alpha_c_ghz"}, "flux");
      s.flux_map = FluxMapSpec{r.number_or(f, "omega_max_ghz", 8.2), r.number_or(f, "alpha_c_ghz", -0.3)};
    }
  }
  if (n["max_excitations"]) {
    if (n["max_excitations"].IsNull()) s.max_excitations.reset();
    else s.max_excitations = static_cast<int>(r.integer(n["max_excitations"], "max_excitations"));
  }
  if (auto idle = r.optional_number(n, "idle_ghz")) s.idle_ghz = idle;
  r.validated(n, [&] { s.validate(); });
  return s;
}

SpectrumRange parse_spectrum(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, {"lo_ghz", "hi_ghz", "points", "max_photons"}, "spectrum");
  SpectrumRange s;
  s.lo_ghz = r.field(n, "lo_ghz");
  s.hi_ghz = r.field(n, "hi_ghz");
  s.points = static_cast<std::size_t>(std::max(0L, r.integer_or(n, "points", 201)));
  s.max_photons = static_cast<int>(r.integer_or(n, "max_photons", 2));
  if (!(s.hi_ghz > s.lo_ghz) || s.points < 2) r.fail(n, "spectrum range is empty (need hi_ghz > lo_ghz and points >= 2)");
  return s;
}

PulseConfig parse_pulse(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, {"kind", "tg_ns", "mmax", "lambdas", "idle_ghz", "filter_mhz", "distortion", "dt_ns"}, "pulse");
  PulseConfig p;
  if (n["kind"]) r.validated(n["kind"], [&] { p.kind = pulse_kind_from_string(r.text(n["kind"], "kind")); });
  p.tg_ns = r.number_or(n, "tg_ns", p.tg_ns);
  p.m_max = static_cast<int>(r.integer_or(n, "mmax", p.m_max));
  if (n["lambdas"]) p.lambdas = r.numbers(n["lambdas"], "lambdas");
  p.idle_ghz = r.optional_number(n, "idle_ghz");
  p.filter_mhz = r.optional_number(n, "filter_mhz");
  if (n["distortion"] && !n["distortion"].IsNull()) {
    const auto v = r.numbers(n["distortion"], "distortion");
    if (v.size() != 2) r.fail(n["distortion"], "distortion must be [r, td_ns]");
    p.distortion = Distortion{v[0], v[1]};
  }
  p.dt_ns = r.number_or(n, "dt_ns", p.dt_ns);
  if (!(p.tg_ns > 0.0)) r.fail(n, "tg_ns must be positive");
  if (p.m_max < 1) r.fail(n, "mmax must be at least 1");
  if (!p.lambdas.empty() && static_cast<int>(p.lambdas.size()) != p.m_max) {
    r.fail(n["lambdas"], "lambdas must have mmax entries");
  }
  return p;
}

NoiseSpec parse_noise(const Reader& r, const YAML::Node& n, std::size_t modes) {
  NoiseSpec s;
  if (n.IsScalar()) {
    if (n.Scalar() == "reference") s = reference_noise();
    else if (n.Scalar() == "improved") s = improved_noise();
    else r.fail(n, "unknown noise preset '" + n.Scalar() + "' (reference, improved)");
  } else {
    r.allow_keys(n, {"preset", "t1_us", "flux_a_uphi0sq", "sigma_uphi0", "white_psd_uphi0sq_hz", "f_ir_hz", "f_uv_hz"},
                 "noise");
    if (n["preset"]) s = parse_noise(r, n["preset"], modes);
    if (n["t1_us"]) s.t1_us = r.numbers(n["t1_us"], "t1_us");
    s.flux_a_uphi0sq = r.number_or(n, "flux_a_uphi0sq", s.flux_a_uphi0sq);
    s.white_psd_uphi0sq_hz = r.number_or(n, "white_psd_uphi0sq_hz", s.white_psd_uphi0sq_hz);
    s.f_ir_hz = r.number_or(n, "f_ir_hz", s.f_ir_hz);
    s.f_uv_hz = r.number_or(n, "f_uv_hz", s.f_uv_hz);
    if (n["sigma_uphi0"]) {
      const YAML::Node sg = n["sigma_uphi0"];
      if (sg.IsScalar() && sg.Scalar() == "from_one_over_f") {
        r.validated(sg, [&] { s.sigma_uphi0 = s.sigma_from_one_over_f(); });
      } else {
        s.sigma_uphi0 = r.number(sg, "sigma_uphi0");
      }
    }
  }
  if (modes > 0) r.validated(n, [&] { s.validate(modes); });
  return s;
}

OptimizerOptions parse_optimizer(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, {"max_evals", "restarts", "simplex_scale", "tol", "xtol"}, "optimizer");
  OptimizerOptions o;
  o.max_evals = static_cast<int>(r.integer_or(n, "max_evals", o.max_evals));
  o.restarts = static_cast<int>(r.integer_or(n, "restarts", o.restarts));
  o.simplex_scale = r.number_or(n, "simplex_scale", o.simplex_scale);
  o.tol = r.number_or(n, "tol", o.tol);
  o.xtol = r.number_or(n, "xtol", o.xtol);
  r.validated(n, [&] { o.validate(); });
  return o;
}

SweepJob parse_sweep(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, {"experiment", "axes", "seed", "workers"}, "sweep");
  SweepJob j;
  if (!n["experiment"]) r.fail(n, "sweep needs an 'experiment'");
  j.experiment = r.text(n["experiment"], "experiment");
  if (!n["axes"] || !n["axes"].IsMap()) r.fail(n, "sweep needs an 'axes' mapping");
  for (const auto& kv : n["axes"]) {
    const auto name = kv.first.as<std::string>();
    j.axes.push_back({name, r.grid(kv.second, name)});
  }
  j.seed = static_cast<std::uint64_t>(r.integer_or(n, "seed", 0));
  j.workers = static_cast<int>(r.integer_or(n, "workers", 1));
  if (j.workers < 1) r.fail(n, "workers must be at least 1");
  return j;
}

DesignMapConfig parse_designmap(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, {"delta12_mhz", "alphac_mhz", "tg_ns"}, "designmap");
  DesignMapConfig d;
  if (!n["delta12_mhz"] || !n["alphac_mhz"]) r.fail(n, "designmap needs 'delta12_mhz' and 'alphac_mhz'");
  d.delta12_mhz = r.grid(n["delta12_mhz"], "delta12_mhz");
  d.alphac_mhz = r.grid(n["alphac_mhz"], "alphac_mhz");
  d.tg_ns = r.number_or(n, "tg_ns", d.tg_ns);
  return d;
}

StrayConfig parse_stray(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, {"kinds", "strengths_mhz", "levels", "max_excitations", "reoptimize"}, "stray");
  StrayConfig s;
  if (n["kinds"]) {
    if (!n["kinds"].IsSequence()) r.fail(n["kinds"], "'kinds' must be a list");
    s.kinds.clear();
    for (const auto& k : n["kinds"]) r.validated(k, [&] { s.kinds.push_back(stray_kind_from_string(r.text(k, "kinds"))); });
  }
  if (n["strengths_mhz"]) s.strengths_mhz = r.grid(n["strengths_mhz"], "strengths_mhz");
  s.truncation.levels = static_cast<int>(r.integer_or(n, "levels", s.truncation.levels));
  if (n["max_excitations"]) s.truncation.max_excitations = static_cast<int>(r.integer(n["max_excitations"], "max_excitations"));
  s.reoptimize = r.boolean_or(n, "reoptimize", s.reoptimize);
  return s;
}

}  // namespace

CircuitSpec circuit_preset(const std::string& name) {
  if (name == "reference") return reference_circuit();
  if (name == "gate") return gate_circuit();
  if (name == "coupler-free") return coupler_free_circuit();
  if (name.rfind("CAQ", 0) == 0 || name.rfind("CBQ", 0) == 0) return scheme_circuit(name);
  throw ConfigError("unknown circuit preset '" + name + "' (reference, gate, coupler-free, CAQ-D, CAQ-U, CBQ-U, CBQ-D)");
}

const CircuitSpec& RunConfig::require_circuit() const {
  if (!circuit) throw ConfigError(path + ": the configuration has no 'circuit' block");
  return *circuit;
}

GateOptions RunConfig::gate_options() const {
  GateOptions o;
  o.kind = pulse.kind;
  o.m_max = pulse.m_max;
  o.dt_ns = pulse.dt_ns;
  o.idle_ghz = pulse.idle_ghz;
  o.filter_mhz = pulse.filter_mhz;
  o.distortion = pulse.distortion;
  o.optimizer = optimizer;
  o.initial_lambdas = pulse.lambdas;
  return o;
}

RunConfig parse_config(const std::string& text, const std::string& name) {
  const Reader r(name);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << name << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  RunConfig c;
  c.path = name;
  if (root.IsNull()) return c;
  r.allow_keys(root,
               {"circuit", "spectrum", "pulse", "noise", "optimizer", "sweep", "gate_times_ns", "designmap", "stray",
                "schemes"},
               "the configuration");
  if (root["circuit"]) c.circuit = parse_circuit(r, root["circuit"]);
  if (root["spectrum"]) c.spectrum = parse_spectrum(r, root["spectrum"]);
  if (root["pulse"]) c.pulse = parse_pulse(r, root["pulse"]);
  if (root["noise"]) c.noise = parse_noise(r, root["noise"], c.circuit ? c.circuit->modes.size() : 0);
  if (root["optimizer"]) c.optimizer = parse_optimizer(r, root["optimizer"]);
  if (root["sweep"]) c.sweep = parse_sweep(r, root["sweep"]);
  if (root["gate_times_ns"]) c.gate_times_ns = r.grid(root["gate_times_ns"], "gate_times_ns");
  if (root["designmap"]) c.designmap = parse_designmap(r, root["designmap"]);
  if (root["stray"]) c.stray = parse_stray(r, root["stray"]);
  if (root["schemes"]) {
    r.allow_keys(root["schemes"], {"samples"}, "schemes");
    c.scheme_samples = static_cast<std::size_t>(std::max(2L, r.integer_or(root["schemes"], "samples", 241)));
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out << ',';
      const std::string& v = cells[k];
      if (v.find_first_of(",\"\n") != std::string::npos) {
        out << '"';
        for (char ch : v) out << (ch == '"' ? "\"\"" : std::string(1, ch));
        out << '"';
      } else {
        out << v;
      }
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void write_csv(const std::string& path, const ResultTable& table) { write_csv(path, table.columns, table.rows); }

std::string tool_version() { return CZPULSE_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["config_path"] = m.config_path;
  j["experiment"] = m.experiment;
  j["output_dir"] = m.output_dir;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  j["outputs"] = m.outputs;
  const auto path = std::filesystem::path(m.output_dir) / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace czpulse
