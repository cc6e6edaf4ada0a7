#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "czpulse/model.hpp"
#include "czpulse/pulse.hpp"

namespace czpulse {

struct PropagationOptions {
  double max_dt_ns = 0.05;
  double unitarity_tolerance = 1e-8;
};

// Piecewise-constant propagator in the Fock basis, exp(-i H(omega_c(t_mid)) dt)
// per step. Throws NumericalError if the result is not unitary.
Eigen::MatrixXcd propagate(const CircuitModel& model, const PulseShape& pulse, const PropagationOptions& options = {});

// max |U^dagger U - I|
double unitarity_error(const Eigen::MatrixXcd& u);

struct GateReport {
  std::vector<Occupation> labels;  // computational states, binary-counter order
  Eigen::MatrixXcd unitary;        // <s'(idle)| U |s(idle)>
  Eigen::MatrixXcd corrected;      // unitary after the best single-qubit Z phases
  std::vector<double> z_phases;    // closed-form virtual-Z phase per qubit, rad
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi_zz = 0.0;  // integral of zeta dt, mapped to (-pi, pi]
  double epg = 0.0;
  std::vector<double> leakage;  // per computational column
  double leakage_total = 0.0;   // mean over columns
  double unitarity_error = 0.0;
};

// Projects a full propagator on the idle adiabatic computational states and
// extracts phases. `zz_pair` selects the two qubits (positions in
// qubit_indices) whose conditional phase is reported.
GateReport computational_unitary(const Eigen::MatrixXcd& propagator, const CircuitModel& model, double idle_ghz,
                                 std::pair<int, int> zz_pair = {0, 1});

// Diagonal controlled-phase target on `nq` qubits acting on the pair (qa, qb).
Eigen::MatrixXcd controlled_phase_target(int nq, int qa, int qb, double phase = 3.141592653589793);

struct EpgResult {
  double epg = 0.0;
  Eigen::MatrixXcd corrected;
  std::vector<double> z_phases;  // optimal per-qubit phases applied, rad
};

// 1 - |Tr(T^dagger Z U)/d|^2 minimized over single-qubit Z rotations Z.
EpgResult epg(const Eigen::MatrixXcd& unitary, const Eigen::MatrixXcd& target);

// Fills report.epg and report.corrected against `target`.
void apply_epg(GateReport& report, const Eigen::MatrixXcd& target);

// Mean over the 60 two-qubit RB states of 1 - |<T psi| U psi>|^2.
double state_averaged_error(const Eigen::MatrixXcd& unitary, const Eigen::MatrixXcd& target);

// One jump |target><source| between instantaneous adiabatic computational
// states (indices into the computational labels). No target means the jump
// empties into an auxiliary leakage level outside the circuit.
struct JumpSpec {
  std::function<double(double t_ns)> rate;  // 1/ns
  int source = 0;
  std::optional<int> target;
};

struct LindbladOptions {
  double max_dt_ns = 0.05;
  double trace_tolerance = 1e-6;
};

struct LindbladResult {
  Eigen::MatrixXcd rho;       // (dim + 1) square, Fock basis plus the leakage level
  Eigen::MatrixXcd rho_comp;  // computational block in the idle adiabatic basis
  double trace = 1.0;
  double min_eigenvalue = 0.0;
  double leaked_population = 0.0;
};

// Strang splitting: exact unitary half steps around an RK4 dissipator step.
// `psi0` holds computational amplitudes in the idle adiabatic basis.
LindbladResult lindblad_propagate(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                                  const Eigen::VectorXcd& psi0, const LindbladOptions& options = {});

// 1 - <psi_ideal| rho |psi_ideal> where psi_ideal is the noiseless evolution of psi0.
double lindblad_state_error(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                            const Eigen::VectorXcd& psi0, const LindbladOptions& options = {});

// Average of lindblad_state_error over the 60 RB states (two qubits only).
double lindblad_rb_error(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                         const LindbladOptions& options = {});

// Wraps an angle to (-pi, pi].
double wrap_phase(double angle);

}  // namespace czpulse
