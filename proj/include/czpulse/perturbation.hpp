#pragma once

#include <array>

#include "czpulse/model.hpp"

namespace czpulse {

// Dispersive ZZ in closed form for two qubits and a coupler, all in rad/ns.
// When alpha1 == alpha2 the equal-anharmonicity quadratic form is used.
// Throws DomainError when Delta12 + alpha1 or Delta12 - alpha2 is resonant.
double zeta_simplified(double delta12, double alpha1, double alpha2, double alpha_c, double g_eff, double nu);

struct ParabolaVertex {
  double g_eff;  // rad/ns
  double zeta;   // rad/ns
};

// Point shared by all equal-anharmonicity parabolas at fixed nu.
ParabolaVertex parabola_common_point(double alpha_q, double alpha_c, double nu);

// nu = g_1c g_2c / (2 Delta_1c Delta_2c) at the given coupler frequency.
double coupling_ratio_nu(const CircuitSpec& spec, double omega_c_ghz);

struct PerturbativeResult {
  std::array<double, 4> zeta_orders{};  // orders 1..4, rad/ns
  double zeta_total = 0.0;
  double nu = 0.0;
};

struct PerturbationOptions {
  // Qubit-coupler detuning must exceed this multiple of g_ic.
  double dispersive_ratio = 3.0;
  // Smallest admissible energy denominator to a reachable intermediate state, rad/ns.
  double min_denominator = 1e-3;
};

// Rayleigh-Schroedinger expansion to fourth order around the uncoupled
// computational states, summed over the full truncated Fock basis.
PerturbativeResult zeta_fourth_order_generic(const CircuitSpec& spec, double omega_c_ghz,
                                             const PerturbationOptions& options = {});

// Energy corrections E_1..E_4 of a single Fock state (rad/ns).
std::array<double, 4> energy_corrections(const CircuitModel& model, const Occupation& state, double omega_c_ghz,
                                         const PerturbationOptions& options = {});

}  // namespace czpulse
