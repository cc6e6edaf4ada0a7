#include "czpulse/perturbation.hpp"

#include <cmath>
#include <sstream>

#include "czpulse/errors.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

double zeta_simplified(double delta12, double alpha1, double alpha2, double alpha_c, double g_eff, double nu) {
  const double p = delta12 + alpha1;
  const double q = delta12 - alpha2;
  if (std::abs(p) < 1e-4 || std::abs(q) < 1e-4) {
    throw DomainError("resonant denominator in simplified ZZ expression");
  }
  if (alpha1 == alpha2) {
    const double a = alpha1;
    const double shift = g_eff - a * nu;
    return 4.0 * a / (delta12 * delta12 - a * a) * shift * shift + 4.0 * (2.0 * alpha_c + a) * nu * nu;
  }
  const double pq = p * q;
  const double linear =
      2.0 * ((alpha1 + alpha2) * g_eff * g_eff - 2.0 * nu * (2.0 * alpha1 * alpha2 + (alpha1 - alpha2) * delta12) * g_eff) /
      pq;
  const double constant = 2.0 * nu * nu * (4.0 * alpha_c + (alpha1 + alpha2) * delta12 * delta12 / pq);
  return linear + constant;
}

ParabolaVertex parabola_common_point(double alpha_q, double alpha_c, double nu) {
  return {alpha_q * nu, 4.0 * (2.0 * alpha_c + alpha_q) * nu * nu};
}

double coupling_ratio_nu(const CircuitSpec& spec, double omega_c_ghz) {
  if (spec.qubit_indices.size() != 2) throw DomainError("nu needs exactly two qubits");
  const int q1 = spec.qubit_indices[0];
  const int q2 = spec.qubit_indices[1];
  const int c = spec.coupler_index;
  if (q1 == c || q2 == c) throw DomainError("nu needs a dedicated coupler mode");
  const double wc = ghz_to_rad(omega_c_ghz);
  const double d1 = ghz_to_rad(spec.modes[q1].frequency_ghz) - wc;
  const double d2 = ghz_to_rad(spec.modes[q2].frequency_ghz) - wc;
  if (std::abs(d1) < 1e-9 || std::abs(d2) < 1e-9) throw DomainError("qubit-coupler degeneracy in nu");
  return coupling_strength(spec, q1, c, omega_c_ghz) * coupling_strength(spec, q2, c, omega_c_ghz) / (2.0 * d1 * d2);
}

std::array<double, 4> energy_corrections(const CircuitModel& model, const Occupation& state, double omega_c_ghz,
                                         const PerturbationOptions& options) {
  const Eigen::MatrixXd h = model.hamiltonian(omega_c_ghz).entries;
  const Eigen::Index n = model.basis().index_of(state);
  const Eigen::VectorXd e = h.diagonal();
  Eigen::MatrixXd v = h;
  v.diagonal().setZero();

  // States reachable from `state` within three applications of V enter the
  // fourth-order sums; only those need a safe energy denominator.
  Eigen::VectorXd reach = Eigen::VectorXd::Zero(h.rows());
  reach(n) = 1.0;
  Eigen::VectorXd frontier = reach;
  for (int hop = 0; hop < 3; ++hop) {
    frontier = (v.cwiseAbs() * frontier).cwiseMin(1.0);
    reach = reach.cwiseMax(frontier);
  }

  Eigen::VectorXd resolvent = Eigen::VectorXd::Zero(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    if (k == n) continue;
    const double gap = e(n) - e(k);
    if (reach(k) > 0.0 && std::abs(gap) < options.min_denominator) {
      std::ostringstream os;
      os << "dispersive assumption violated: " << to_string(model.basis().occupation(k)) << " is within "
         << std::abs(gap) << " rad/ns of " << to_string(state);
      throw DomainError(os.str());
    }
    if (reach(k) > 0.0) resolvent(k) = 1.0 / gap;
  }

  const Eigen::VectorXd col = v.col(n);
  const Eigen::VectorXd w1 = resolvent.cwiseProduct(col);
  const double e2 = col.dot(w1);
  const double e3 = w1.dot(v * w1);
  const Eigen::VectorXd vw1 = v * w1;
  const double e4 = vw1.dot(resolvent.cwiseProduct(vw1)) - e2 * w1.squaredNorm();
  return {v(n, n), e2, e3, e4};
}

PerturbativeResult zeta_fourth_order_generic(const CircuitSpec& spec, double omega_c_ghz,
                                             const PerturbationOptions& options) {
  spec.validate();
  if (spec.qubit_indices.size() != 2) throw DomainError("perturbative ZZ needs exactly two qubits");
  const int c = spec.coupler_index;
  for (int q : spec.qubit_indices) {
    if (q == c) throw DomainError("perturbative ZZ needs a dedicated coupler mode");
  }
  const double wc = ghz_to_rad(omega_c_ghz);
  for (int q : spec.qubit_indices) {
    const double g = std::abs(coupling_strength(spec, q, c, omega_c_ghz));
    const double delta = std::abs(ghz_to_rad(spec.modes[q].frequency_ghz) - wc);
    if (g > 0.0 && delta <= options.dispersive_ratio * g) {
      std::ostringstream os;
      os << "qubit " << spec.modes[q].label << " is not dispersive at " << omega_c_ghz << " GHz (|Delta|/g = "
         << delta / g << ")";
      throw DomainError(os.str());
    }
  }

  const CircuitModel model(spec);
  const auto labels = computational_labels(spec);
  const double sign[4] = {1.0, -1.0, -1.0, 1.0};
  PerturbativeResult r;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const auto corr = energy_corrections(model, labels[s], omega_c_ghz, options);
    for (int k = 0; k < 4; ++k) r.zeta_orders[k] += sign[s] * corr[k];
  }
  r.zeta_total = r.zeta_orders[0] + r.zeta_orders[1] + r.zeta_orders[2] + r.zeta_orders[3];
  r.nu = coupling_ratio_nu(spec, omega_c_ghz);
  return r;
}

}  // namespace czpulse
