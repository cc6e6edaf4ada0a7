#include "czpulse/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "czpulse/errors.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

std::string to_string(const Occupation& occ) {
  std::string out = "|";
  for (int n : occ) out += std::to_string(n);
  return out + ">";
}

void CircuitSpec::validate() const {
  if (modes.empty()) throw ConfigError("circuit has no modes");
  int tunable_count = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto& m = modes[k];
    if (m.levels < 2) {
      throw ConfigError("mode '" + m.label + "': levels must be >= 2");
    }
    if (!m.tunable && !(m.frequency_ghz > 0.0)) {
      throw ConfigError("mode '" + m.label + "': frequency must be positive");
    }
    if (m.tunable) ++tunable_count;
  }
  if (tunable_count != 1) throw ConfigError("exactly one mode must be tunable");
  if (coupler_index < 0 || coupler_index >= static_cast<int>(modes.size()) ||
      !modes[coupler_index].tunable) {
    throw ConfigError("coupler_index must refer to the tunable mode");
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& c : couplings) {
    if (c.i < 0 || c.j < 0 || c.i >= static_cast<int>(modes.size()) ||
        c.j >= static_cast<int>(modes.size())) {
      throw ConfigError("coupling references a missing mode");
    }
    if (c.i >= c.j) throw ConfigError("coupling pair must satisfy i < j");
    if (std::abs(c.rho) >= 0.1) {
      throw ConfigError("coupling (" + std::to_string(c.i) + ", " + std::to_string(c.j) +
                        "): |rho| must be < 0.1");
    }
    if (!seen.insert({c.i, c.j}).second) {
      throw ConfigError("duplicate coupling pair (" + std::to_string(c.i) + ", " +
                        std::to_string(c.j) + ")");
    }
  }
  std::set<int> qubits;
  for (int q : qubit_indices) {
    if (q < 0 || q >= static_cast<int>(modes.size())) throw ConfigError("qubit index out of range");
    if (!qubits.insert(q).second) throw ConfigError("duplicate qubit index");
  }
  if (qubit_indices.empty()) throw ConfigError("at least one qubit index is required");
  if (max_excitations && *max_excitations < 2) {
    throw ConfigError("max_excitations must be >= 2");
  }
  if (flux_map) {
    if (!(flux_map->omega_max_ghz > 0.0)) throw ConfigError("flux map omega_max must be positive");
  }
}

double CircuitSpec::coupling_rho(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const auto& c : couplings) {
    if (c.i == i && c.j == j) return c.rho;
  }
  return 0.0;
}

FockBasis::FockBasis(std::vector<int> levels, std::optional<int> max_excitations)
    : levels_(std::move(levels)) {
  Occupation occ(levels_.size(), 0);
  // Odometer with the last mode varying fastest gives lexicographic order.
  while (true) {
    const int total = std::accumulate(occ.begin(), occ.end(), 0);
    if (!max_excitations || total <= *max_excitations) {
      index_.emplace(occ, static_cast<Eigen::Index>(occupations_.size()));
      occupations_.push_back(occ);
    }
    int k = static_cast<int>(levels_.size()) - 1;
    while (k >= 0 && occ[k] + 1 >= levels_[k]) {
      occ[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++occ[k];
  }
}

std::optional<Eigen::Index> FockBasis::find(const Occupation& occ) const {
  auto it = index_.find(occ);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::Index FockBasis::index_of(const Occupation& occ) const {
  auto idx = find(occ);
  if (!idx) throw DomainError("occupation " + to_string(occ) + " is not in the basis");
  return *idx;
}

FockBasis build_basis(const CircuitSpec& spec) {
  std::vector<int> levels;
  levels.reserve(spec.modes.size());
  for (const auto& m : spec.modes) levels.push_back(m.levels);
  return FockBasis(std::move(levels), spec.max_excitations);
}

namespace {

// Adds coeff * (a_i + a_i^dag)(a_j + a_j^dag) to `out`.
void add_exchange(const FockBasis& basis, int i, int j, double coeff, Eigen::MatrixXd& out) {
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  for (Eigen::Index col = 0; col < dim; ++col) {
    const Occupation& occ = basis.occupation(col);
    for (int di : {-1, 1}) {
      const int ni = occ[i] + di;
      if (ni < 0 || ni >= basis.levels()[i]) continue;
      for (int dj : {-1, 1}) {
        const int nj = occ[j] + dj;
        if (nj < 0 || nj >= basis.levels()[j]) continue;
        Occupation target = occ;
        target[i] = ni;
        target[j] = nj;
        auto row = basis.find(target);
        if (!row) continue;
        const double elem = std::sqrt(static_cast<double>(std::max(occ[i], ni))) *
                            std::sqrt(static_cast<double>(std::max(occ[j], nj)));
        out(*row, col) += coeff * elem;
      }
    }
  }
}

std::vector<std::vector<Eigen::Index>> find_sectors(const Eigen::MatrixXd& pattern) {
  const Eigen::Index n = pattern.rows();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](Eigen::Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (pattern(r, c) != 0.0) parent[root(r)] = root(c);
    }
  }
  std::map<Eigen::Index, std::vector<Eigen::Index>> groups;
  for (Eigen::Index k = 0; k < n; ++k) groups[root(k)].push_back(k);
  std::vector<std::vector<Eigen::Index>> out;
  out.reserve(groups.size());
  for (auto& [_, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  return m(idx, idx);
}

}  // namespace

CircuitModel::CircuitModel(CircuitSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  basis_ = std::make_shared<const FockBasis>(build_basis(spec_));
  const auto dim = static_cast<Eigen::Index>(basis_->dim());
  const int c = spec_.coupler_index;

  static_part_ = Eigen::MatrixXd::Zero(dim, dim);
  coupler_number_ = Eigen::MatrixXd::Zero(dim, dim);
  coupler_coupling_ = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const Occupation& occ = basis_->occupation(k);
    double e = 0.0;
    for (std::size_t m = 0; m < occ.size(); ++m) {
      const double n = occ[m];
      const double alpha = ghz_to_rad(spec_.modes[m].anharmonicity_ghz);
      e += 0.5 * alpha * n * (n - 1.0);
      if (static_cast<int>(m) != c) e += ghz_to_rad(spec_.modes[m].frequency_ghz) * n;
    }
    static_part_(k, k) = e;
    coupler_number_(k, k) = occ[c];
  }
  Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& cp : spec_.couplings) {
    if (cp.rho == 0.0) continue;
    if (cp.i == c || cp.j == c) {
      const int other = cp.i == c ? cp.j : cp.i;
      const double coeff = cp.rho * std::sqrt(ghz_to_rad(spec_.modes[other].frequency_ghz));
      add_exchange(*basis_, cp.i, cp.j, coeff, coupler_coupling_);
    } else {
      const double coeff = cp.rho * std::sqrt(ghz_to_rad(spec_.modes[cp.i].frequency_ghz) *
                                              ghz_to_rad(spec_.modes[cp.j].frequency_ghz));
      add_exchange(*basis_, cp.i, cp.j, coeff, static_part_);
    }
    add_exchange(*basis_, cp.i, cp.j, 1.0, pattern);
  }
  sectors_ = find_sectors(pattern);
  for (const auto& s : sectors_) {
    sector_static_.push_back(restrict(static_part_, s));
    sector_number_.push_back(restrict(coupler_number_, s));
    sector_coupling_.push_back(restrict(coupler_coupling_, s));
  }
}

void CircuitModel::check_range(double omega_c_ghz) const {
  if (!(omega_c_ghz >= kMinCouplerGhz && omega_c_ghz <= kMaxCouplerGhz)) {
    std::ostringstream os;
    os << "coupler frequency " << omega_c_ghz << " GHz outside [" << kMinCouplerGhz << ", "
       << kMaxCouplerGhz << "] GHz";
    throw DomainError(os.str());
  }
}

HamiltonianMatrix CircuitModel::hamiltonian(double omega_c_ghz) const {
  check_range(omega_c_ghz);
  const double w = ghz_to_rad(omega_c_ghz);
  HamiltonianMatrix h;
  h.entries = static_part_ + w * coupler_number_ + std::sqrt(w) * coupler_coupling_;
  h.basis = basis_;
  return h;
}

Eigen::MatrixXd CircuitModel::sector_hamiltonian(std::size_t sector, double omega_c_ghz) const {
  check_range(omega_c_ghz);
  const double w = ghz_to_rad(omega_c_ghz);
  return sector_static_[sector] + w * sector_number_[sector] + std::sqrt(w) * sector_coupling_[sector];
}

Eigen::MatrixXd CircuitModel::coupler_derivative(double omega_c_ghz) const {
  check_range(omega_c_ghz);
  const double w = ghz_to_rad(omega_c_ghz);
  return coupler_number_ + (0.5 / std::sqrt(w)) * coupler_coupling_;
}

Eigen::MatrixXd CircuitModel::number_operator(int mode) const {
  const auto dim = static_cast<Eigen::Index>(basis_->dim());
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) n(k, k) = basis_->occupation(k)[mode];
  return n;
}

Eigen::MatrixXd CircuitModel::position_operator(int mode) const {
  const auto dim = static_cast<Eigen::Index>(basis_->dim());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const Occupation& occ = basis_->occupation(col);
    for (int d : {-1, 1}) {
      const int n = occ[mode] + d;
      if (n < 0 || n >= basis_->levels()[mode]) continue;
      Occupation target = occ;
      target[mode] = n;
      if (auto row = basis_->find(target)) {
        x(*row, col) = std::sqrt(static_cast<double>(std::max(occ[mode], n)));
      }
    }
  }
  return x;
}

double CircuitModel::bare_energy(const Occupation& occ, double omega_c_ghz) const {
  double e = 0.0;
  for (std::size_t m = 0; m < occ.size(); ++m) {
    const double n = occ[m];
    const double w = ghz_to_rad(mode_frequency_ghz(spec_, static_cast<int>(m), omega_c_ghz));
    e += w * n + 0.5 * ghz_to_rad(spec_.modes[m].anharmonicity_ghz) * n * (n - 1.0);
  }
  return e;
}

HamiltonianMatrix assemble_hamiltonian(const CircuitSpec& spec, double omega_c_ghz) {
  return CircuitModel(spec).hamiltonian(omega_c_ghz);
}

double mode_frequency_ghz(const CircuitSpec& spec, int i, double omega_c_ghz) {
  return i == spec.coupler_index ? omega_c_ghz : spec.modes[i].frequency_ghz;
}

double coupling_strength(const CircuitSpec& spec, int i, int j, double omega_c_ghz) {
  const double rho = spec.coupling_rho(i, j);
  return rho * std::sqrt(ghz_to_rad(mode_frequency_ghz(spec, i, omega_c_ghz)) *
                         ghz_to_rad(mode_frequency_ghz(spec, j, omega_c_ghz)));
}

double effective_coupling(const CircuitSpec& spec, double omega_c_ghz) {
  if (spec.qubit_indices.size() != 2) {
    throw DomainError("effective coupling needs exactly two qubits");
  }
  const int q1 = spec.qubit_indices[0];
  const int q2 = spec.qubit_indices[1];
  const int c = spec.coupler_index;
  if (q1 == c || q2 == c) throw DomainError("effective coupling needs a dedicated coupler mode");
  const double wc = ghz_to_rad(omega_c_ghz);
  const double w1 = ghz_to_rad(spec.modes[q1].frequency_ghz);
  const double w2 = ghz_to_rad(spec.modes[q2].frequency_ghz);
  const double d1 = w1 - wc;
  const double d2 = w2 - wc;
  if (std::abs(d1) < 1e-9 || std::abs(d2) < 1e-9) {
    throw DomainError("qubit-coupler degeneracy: effective coupling is singular");
  }
  const double g1c = coupling_strength(spec, q1, c, omega_c_ghz);
  const double g2c = coupling_strength(spec, q2, c, omega_c_ghz);
  const double g12 = coupling_strength(spec, q1, q2, omega_c_ghz);
  return g12 + 0.5 * g1c * g2c * (1.0 / d1 + 1.0 / d2 - 1.0 / (w1 + wc) - 1.0 / (w2 + wc));
}

FluxPoint flux_to_frequency(const FluxMapSpec& map, double phi) {
  const double cosv = std::cos(std::numbers::pi * phi);
  if (std::abs(cosv) < 1e-12) {
    throw DomainError("flux at half-integer quantum: frequency slope is singular");
  }
  const double scale = map.omega_max_ghz + std::abs(map.alpha_c_ghz);
  const double root = std::sqrt(std::abs(cosv));
  FluxPoint p;
  p.omega_c_ghz = scale * root - std::abs(map.alpha_c_ghz);
  const double sign = cosv > 0 ? 1.0 : -1.0;
  p.domega_dphi_ghz = scale * sign * (-std::numbers::pi * std::sin(std::numbers::pi * phi)) / (2.0 * root);
  return p;
}

double frequency_to_flux(const FluxMapSpec& map, double omega_c_ghz) {
  const double scale = map.omega_max_ghz + std::abs(map.alpha_c_ghz);
  const double r = (omega_c_ghz + std::abs(map.alpha_c_ghz)) / scale;
  if (!(r > 0.0) || r > 1.0 + 1e-15) {
    throw DomainError("frequency " + std::to_string(omega_c_ghz) + " GHz unreachable by the flux map");
  }
  return std::acos(std::min(1.0, r * r)) / std::numbers::pi;
}

std::vector<Occupation> computational_labels(const CircuitSpec& spec) {
  const std::size_t nq = spec.qubit_indices.size();
  std::vector<Occupation> out;
  out.reserve(std::size_t{1} << nq);
  for (std::size_t code = 0; code < (std::size_t{1} << nq); ++code) {
    Occupation occ(spec.modes.size(), 0);
    for (std::size_t q = 0; q < nq; ++q) {
      occ[spec.qubit_indices[q]] = static_cast<int>((code >> (nq - 1 - q)) & 1U);
    }
    out.push_back(std::move(occ));
  }
  return out;
}

}  // namespace czpulse
