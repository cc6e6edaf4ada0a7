#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "czpulse/model.hpp"

namespace czpulse {

struct Eigensystem {
  Eigen::VectorXd values;   // ascending, rad/ns
  Eigen::MatrixXd vectors;  // orthonormal columns, largest-magnitude component positive
};

// Dense symmetric eigendecomposition. Decoupled blocks of `h` are detected and
// diagonalized separately. Throws DomainError if `h` is not symmetric.
Eigensystem diagonalize(const HamiltonianMatrix& h);

// Same result for H(omega_c) of `model`, using its precomputed sectors.
Eigensystem diagonalize(const CircuitModel& model, double omega_c_ghz);

struct TrackingOptions {
  double anchor_overlap = 0.9;
  double continuity_overlap = 0.5;
  int max_refinements = 10;
  // Largest spacing used when a tracking path has to be built between two points.
  double max_step_ghz = 0.005;
  // Explicit labelling anchor; otherwise the circuit idle point, otherwise
  // the first valid sample scanning down from the top of the grid.
  std::optional<double> anchor_ghz;
  bool compute_d_factor = true;
};

struct SpectrumGrid {
  std::vector<double> omega_c_ghz;
  std::vector<Eigen::VectorXd> eigenvalues;
  std::vector<Occupation> labels;
  std::vector<Eigen::MatrixXd> tracked_vectors;  // dim x labels per sample
  std::vector<Eigen::VectorXd> tracked_energies;  // labels per sample, rad/ns
  std::size_t anchor_sample = 0;
  // Filled when the computational labels are part of `labels`.
  std::vector<double> zeta;      // rad/ns
  std::vector<double> g_eff;     // rad/ns, NaN unless two qubits and one coupler
  std::vector<double> d_factor;  // ns^2 (rad/ns)^-2
  std::vector<bool> d_divergent;

  // Column of `label` inside tracked_vectors/tracked_energies.
  std::size_t column(const Occupation& label) const;
};

// Diabatic-overlap check used to name adiabatic states.
// Returns the eigenvector column for each label, or nullopt when any label's
// overlap is below `threshold` or two labels claim the same column.
std::optional<std::vector<Eigen::Index>> label_columns(const FockBasis& basis, const Eigensystem& es,
                                                       const std::vector<Occupation>& labels,
                                                       double threshold);

// Maximum-overlap continuation of `labels` over an ascending grid, with
// bisection refinement of intervals whose best overlap drops below the
// continuity threshold. Throws TrackingError when no anchor is found or
// refinement is exhausted.
SpectrumGrid track_adiabatic(const CircuitModel& model, const std::vector<double>& grid_ghz,
                             const std::vector<Occupation>& labels, const TrackingOptions& options = {});

struct DFactor {
  double value = 0.0;
  bool divergent = false;
};

// D-factor for the tracked computational columns of an eigensystem.
DFactor d_factor_from(const CircuitModel& model, double omega_c_ghz, const Eigensystem& es,
                      const std::vector<Eigen::Index>& computational_columns);

// Labelled eigensystem at a single coupler frequency: tracks from the anchor
// when the point itself is not dispersive.
struct LabelledPoint {
  Eigensystem eigensystem;
  std::vector<Occupation> labels;
  std::vector<Eigen::Index> columns;
};
LabelledPoint labelled_point(const CircuitModel& model, double omega_c_ghz, const std::vector<Occupation>& labels,
                             const TrackingOptions& options = {});

// zeta = E_101 - E_100 - E_001 + E_000 from tracked energies, rad/ns.
double zz_strength(const CircuitModel& model, double omega_c_ghz, const TrackingOptions& options = {});
double zz_strength(const CircuitSpec& spec, double omega_c_ghz, const TrackingOptions& options = {});

DFactor d_factor(const CircuitModel& model, double omega_c_ghz, const TrackingOptions& options = {});

// Running maximum of D between omega_c and omega_idle on a grid of at least 200 points.
DFactor d_star(const CircuitModel& model, double omega_c_ghz, double omega_idle_ghz,
               const TrackingOptions& options = {});

// Running maximum of a D curve outwards from the anchor sample.
std::vector<double> running_max_from(const std::vector<double>& values, std::size_t anchor);

// ZZ combination of four energies ordered as computational_labels().
double zz_combination(const Eigen::VectorXd& energies);

// Uniform ascending grid with `count` samples (count >= 2).
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace czpulse
