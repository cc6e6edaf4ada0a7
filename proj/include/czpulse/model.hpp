#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace czpulse {

// Photon numbers (n_1, ..., n_N) in mode order.
using Occupation = std::vector<int>;

std::string to_string(const Occupation& occ);

struct ModeSpec {
  std::string label;
  double frequency_ghz = 0.0;      // omega_i / 2pi; ignored for the tunable mode
  double anharmonicity_ghz = 0.0;  // alpha_i / 2pi, usually negative
  int levels = 2;
  bool tunable = false;
};

struct CouplingSpec {
  int i = 0;
  int j = 1;
  double rho = 0.0;  // g_ij = rho * sqrt(omega_i * omega_j)
};

// Symmetric split-transmon map omega_c(Phi) = (omega_max + |alpha_c|) sqrt|cos(pi Phi)| - |alpha_c|.
struct FluxMapSpec {
  double omega_max_ghz = 8.2;
  double alpha_c_ghz = -0.3;
};

struct CircuitSpec {
  std::vector<ModeSpec> modes;
  std::vector<CouplingSpec> couplings;
  std::vector<int> qubit_indices;
  int coupler_index = 1;
  std::optional<FluxMapSpec> flux_map;
  // Optional cap on the total photon number of retained Fock states. Without
  // it the basis is the full product of per-mode truncations.
  std::optional<int> max_excitations;
  // Idle bias of the tunable mode; doubles as the labelling anchor.
  std::optional<double> idle_ghz;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  double coupling_rho(int i, int j) const;
};

class FockBasis {
 public:
  FockBasis() = default;
  FockBasis(std::vector<int> levels, std::optional<int> max_excitations);

  std::size_t dim() const { return occupations_.size(); }
  std::size_t modes() const { return levels_.size(); }
  const std::vector<int>& levels() const { return levels_; }
  const std::vector<Occupation>& occupations() const { return occupations_; }
  const Occupation& occupation(std::size_t k) const { return occupations_[k]; }

  std::optional<Eigen::Index> find(const Occupation& occ) const;
  // Throws DomainError when the occupation is not part of the basis.
  Eigen::Index index_of(const Occupation& occ) const;

 private:
  std::vector<int> levels_;
  std::vector<Occupation> occupations_;
  std::map<Occupation, Eigen::Index> index_;
};

// Real symmetric (hence Hermitian) Hamiltonian in rad/ns over a Fock basis.
struct HamiltonianMatrix {
  Eigen::MatrixXd entries;
  std::shared_ptr<const FockBasis> basis;

  Eigen::Index dim() const { return entries.rows(); }
};

// Precomputed operator pieces of H(omega_c) = A + omega_c * N_c + sqrt(omega_c) * C,
// plus the block structure implied by the coupling graph (total photon parity
// for any circuit with exchange couplings).
class CircuitModel {
 public:
  explicit CircuitModel(CircuitSpec spec);

  const CircuitSpec& spec() const { return spec_; }
  const FockBasis& basis() const { return *basis_; }
  std::shared_ptr<const FockBasis> basis_ptr() const { return basis_; }
  std::size_t dim() const { return basis_->dim(); }

  // Index sets of decoupled blocks. Every block is invariant under H(omega_c) for all omega_c.
  const std::vector<std::vector<Eigen::Index>>& sectors() const { return sectors_; }

  HamiltonianMatrix hamiltonian(double omega_c_ghz) const;
  Eigen::MatrixXd sector_hamiltonian(std::size_t sector, double omega_c_ghz) const;

  // dH/d(omega_c) with omega_c in rad/ns; includes dg/domega_c = g / (2 omega_c).
  Eigen::MatrixXd coupler_derivative(double omega_c_ghz) const;

  Eigen::MatrixXd number_operator(int mode) const;
  // a + a^dagger
  Eigen::MatrixXd position_operator(int mode) const;

  // Uncoupled energy of a Fock state at the given coupler frequency (rad/ns).
  double bare_energy(const Occupation& occ, double omega_c_ghz) const;

 private:
  void check_range(double omega_c_ghz) const;

  CircuitSpec spec_;
  std::shared_ptr<const FockBasis> basis_;
  std::vector<std::vector<Eigen::Index>> sectors_;
  Eigen::MatrixXd static_part_;
  Eigen::MatrixXd coupler_number_;
  Eigen::MatrixXd coupler_coupling_;
  std::vector<Eigen::MatrixXd> sector_static_;
  std::vector<Eigen::MatrixXd> sector_number_;
  std::vector<Eigen::MatrixXd> sector_coupling_;
};

inline constexpr double kMinCouplerGhz = 1.0;
inline constexpr double kMaxCouplerGhz = 20.0;

FockBasis build_basis(const CircuitSpec& spec);

HamiltonianMatrix assemble_hamiltonian(const CircuitSpec& spec, double omega_c_ghz);

// Frequency of mode `i` in GHz with the tunable mode set to omega_c.
double mode_frequency_ghz(const CircuitSpec& spec, int i, double omega_c_ghz);

// g_ij in rad/ns at the given coupler frequency.
double coupling_strength(const CircuitSpec& spec, int i, int j, double omega_c_ghz);

// Schrieffer-Wolff effective qubit-qubit exchange coupling for a
// qubit-coupler-qubit circuit, in rad/ns. Throws DomainError when a qubit is
// degenerate with the coupler.
double effective_coupling(const CircuitSpec& spec, double omega_c_ghz);

struct FluxPoint {
  double omega_c_ghz;
  double domega_dphi_ghz;  // GHz per flux quantum
};

FluxPoint flux_to_frequency(const FluxMapSpec& map, double phi);

// Inverse of flux_to_frequency on the branch phi in [0, 1/2).
double frequency_to_flux(const FluxMapSpec& map, double omega_c_ghz);

// Computational basis labels: every qubit in {0, 1}, all other modes empty.
// Ordered as a binary counter with the first listed qubit most significant,
// e.g. |000>, |001>, |100>, |101> for modes (Q1, C, Q2).
std::vector<Occupation> computational_labels(const CircuitSpec& spec);

}  // namespace czpulse
