#include "czpulse/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "czpulse/errors.hpp"
#include "czpulse/noise.hpp"
#include "czpulse/spectrum.hpp"

namespace czpulse {

namespace {

using cd = std::complex<double>;

std::size_t steps_for(double duration, double max_dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / max_dt - 1e-9)));
}

Eigen::MatrixXcd block_exponential(const Eigen::MatrixXd& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed during propagation");
  const Eigen::VectorXd& e = solver.eigenvalues();
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::VectorXcd phase(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) phase(k) = std::polar(1.0, -e(k) * dt);
  const Eigen::MatrixXcd vc = v.cast<cd>();
  return vc * phase.asDiagonal() * vc.adjoint();
}

// Bit of qubit q in the binary-counter index of a computational state.
int index_bit(int index, int nq, int q) { return (index >> (nq - 1 - q)) & 1; }

Eigen::MatrixXd idle_computational_vectors(const CircuitModel& model, double idle_ghz) {
  TrackingOptions topt;
  topt.anchor_ghz = idle_ghz;
  const auto labels = computational_labels(model.spec());
  const LabelledPoint p = labelled_point(model, idle_ghz, labels, topt);
  Eigen::MatrixXd vs(static_cast<Eigen::Index>(model.dim()), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t c = 0; c < labels.size(); ++c) {
    vs.col(static_cast<Eigen::Index>(c)) = p.eigensystem.vectors.col(p.columns[c]);
  }
  return vs;
}

}  // namespace

double wrap_phase(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

double unitarity_error(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd g = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols());
  return g.cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd propagate(const CircuitModel& model, const PulseShape& pulse, const PropagationOptions& options) {
  if (!(options.max_dt_ns > 0.0) || options.max_dt_ns > 0.05) {
    throw DomainError("propagation step must lie in (0, 0.05] ns");
  }
  const double duration = pulse.duration_ns();
  const std::size_t n = steps_for(duration, options.max_dt_ns);
  const double dt = duration / static_cast<double>(n);
  const auto& sectors = model.sectors();
  std::vector<Eigen::MatrixXcd> blocks(sectors.size());
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    blocks[s] = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(sectors[s].size()),
                                           static_cast<Eigen::Index>(sectors[s].size()));
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double w = pulse.value_at((static_cast<double>(k) + 0.5) * dt);
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      blocks[s] = block_exponential(model.sector_hamiltonian(s, w), dt) * blocks[s];
    }
  }
  const auto dim = static_cast<Eigen::Index>(model.dim());
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t s = 0; s < sectors.size(); ++s) u(sectors[s], sectors[s]) = blocks[s];
  const double err = unitarity_error(u);
  if (err > options.unitarity_tolerance) {
    std::ostringstream os;
    os << "propagator is not unitary (deviation " << err << ")";
    throw NumericalError(os.str());
  }
  return u;
}

Eigen::MatrixXcd controlled_phase_target(int nq, int qa, int qb, double phase) {
  const int d = 1 << nq;
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(d, d);
  for (int s = 0; s < d; ++s) {
    if (index_bit(s, nq, qa) && index_bit(s, nq, qb)) t(s, s) = std::polar(1.0, phase);
  }
  return t;
}

EpgResult epg(const Eigen::MatrixXcd& unitary, const Eigen::MatrixXcd& target) {
  if (unitary.rows() != target.rows() || unitary.cols() != target.cols() || unitary.rows() != unitary.cols()) {
    throw DomainError("EPG needs square matrices of equal dimension");
  }
  const auto d = static_cast<int>(unitary.rows());
  int nq = 0;
  while ((1 << nq) < d) ++nq;
  if ((1 << nq) != d) throw DomainError("EPG dimension must be a power of two");

  // Tr(T^dagger Z U) = sum_s z_s c_s with z_s = exp(-i sum_q n_q(s) a_q).
  Eigen::VectorXcd c(d);
  for (int s = 0; s < d; ++s) {
    cd acc = 0.0;
    for (int j = 0; j < d; ++j) acc += std::conj(target(s, j)) * unitary(s, j);
    c(s) = acc;
  }
  std::vector<double> a(static_cast<std::size_t>(nq), 0.0);
  for (int q = 0; q < nq; ++q) {
    const int e = 1 << (nq - 1 - q);
    if (std::abs(c(e)) > 0.0 && std::abs(c(0)) > 0.0) a[q] = std::arg(c(e)) - std::arg(c(0));
  }
  auto z_of = [&](int s, int skip) {
    double ph = 0.0;
    for (int q = 0; q < nq; ++q) {
      if (q != skip && index_bit(s, nq, q)) ph += a[q];
    }
    return std::polar(1.0, -ph);
  };
  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (int q = 0; q < nq; ++q) {
      cd lo = 0.0;
      cd hi = 0.0;
      for (int s = 0; s < d; ++s) {
        const cd term = z_of(s, q) * c(s);
        (index_bit(s, nq, q) ? hi : lo) += term;
      }
      if (std::abs(lo) == 0.0 || std::abs(hi) == 0.0) continue;
      const double next = std::arg(hi) - std::arg(lo);
      change = std::max(change, std::abs(wrap_phase(next - a[q])));
      a[q] = next;
    }
    if (change < 1e-14) break;
  }
  cd tr = 0.0;
  for (int s = 0; s < d; ++s) tr += z_of(s, -1) * c(s);
  EpgResult r;
  r.epg = std::clamp(1.0 - std::norm(tr / static_cast<double>(d)), 0.0, 1.0);
  r.corrected = unitary;
  for (int s = 0; s < d; ++s) r.corrected.row(s) *= z_of(s, -1);
  r.z_phases.resize(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) r.z_phases[q] = wrap_phase(-a[q]);
  return r;
}

void apply_epg(GateReport& report, const Eigen::MatrixXcd& target) {
  EpgResult r = epg(report.unitary, target);
  report.epg = r.epg;
  report.corrected = std::move(r.corrected);
}

GateReport computational_unitary(const Eigen::MatrixXcd& propagator, const CircuitModel& model, double idle_ghz,
                                 std::pair<int, int> zz_pair) {
  const CircuitSpec& spec = model.spec();
  const int nq = static_cast<int>(spec.qubit_indices.size());
  if (zz_pair.first < 0 || zz_pair.second >= nq || zz_pair.first == zz_pair.second) {
    throw DomainError("invalid qubit pair for the conditional phase");
  }
  GateReport r;
  r.labels = computational_labels(spec);
  const Eigen::MatrixXcd vs = idle_computational_vectors(model, idle_ghz).cast<cd>();
  r.unitary = vs.adjoint() * propagator * vs;
  r.unitarity_error = unitarity_error(propagator);
  const auto d = static_cast<int>(r.labels.size());
  r.leakage.resize(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) {
    r.leakage[s] = std::max(0.0, 1.0 - r.unitary.col(s).squaredNorm());
    r.leakage_total += r.leakage[s] / d;
  }
  auto theta = [&](int s) { return std::arg(r.unitary(s, s)); };
  r.z_phases.resize(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) r.z_phases[q] = wrap_phase(-(theta(1 << (nq - 1 - q)) - theta(0)));
  r.phi1 = r.z_phases[static_cast<std::size_t>(zz_pair.first)];
  r.phi2 = r.z_phases[static_cast<std::size_t>(zz_pair.second)];
  const int ea = 1 << (nq - 1 - zz_pair.first);
  const int eb = 1 << (nq - 1 - zz_pair.second);
  r.phi_zz = wrap_phase(-(theta(ea | eb) - theta(ea) - theta(eb) + theta(0)));
  apply_epg(r, controlled_phase_target(nq, zz_pair.first, zz_pair.second));
  return r;
}

double state_averaged_error(const Eigen::MatrixXcd& unitary, const Eigen::MatrixXcd& target) {
  if (unitary.rows() != 4 || target.rows() != 4 || unitary.cols() != 4 || target.cols() != 4) {
    throw DomainError("state-averaged error is defined for two-qubit (4x4) gates");
  }
  double acc = 0.0;
  const auto& states = rb_states();
  for (const auto& st : states) {
    const Eigen::VectorXcd ideal = target * st.amplitudes;
    const Eigen::VectorXcd actual = unitary * st.amplitudes;
    acc += 1.0 - std::norm(ideal.dot(actual));
  }
  return acc / static_cast<double>(states.size());
}

namespace {

struct Tracker {
  Eigen::MatrixXd vectors;  // dim x d tracked computational states

  void update(const Eigensystem& es) {
    const Eigen::MatrixXd ov = (es.vectors.transpose() * vectors).cwiseAbs();
    Eigen::MatrixXd next(vectors.rows(), vectors.cols());
    std::vector<bool> taken(static_cast<std::size_t>(ov.rows()), false);
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
      Eigen::Index best = -1;
      double bv = -1.0;
      for (Eigen::Index r = 0; r < ov.rows(); ++r) {
        if (!taken[r] && ov(r, c) > bv) {
          bv = ov(r, c);
          best = r;
        }
      }
      if (bv < 0.5) throw TrackingError("lost adiabatic computational state during Lindblad evolution");
      taken[best] = true;
      Eigen::VectorXd v = es.vectors.col(best);
      if (v.dot(vectors.col(c)) < 0.0) v = -v;
      next.col(c) = v;
    }
    vectors = std::move(next);
  }
};

// Evolves an operator (not necessarily Hermitian) under the master equation.
// Also returns the noiseless step-propagator product when `unitary_out` is set.
Eigen::MatrixXcd evolve_operator(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                                 const Eigen::MatrixXcd& rho0, const Eigen::MatrixXd& idle_vectors,
                                 const LindbladOptions& options, Eigen::MatrixXcd* unitary_out) {
  const auto dim = static_cast<Eigen::Index>(model.dim());
  const Eigen::Index full = dim + 1;
  const double duration = pulse.duration_ns();
  const std::size_t n = steps_for(duration, options.max_dt_ns);
  const double dt = duration / static_cast<double>(n);
  Tracker tracker{idle_vectors};
  Eigen::MatrixXcd rho = rho0;
  Eigen::MatrixXcd u_total;
  if (unitary_out) u_total = Eigen::MatrixXcd::Identity(full, full);

  for (std::size_t k = 0; k < n; ++k) {
    const double tm = (static_cast<double>(k) + 0.5) * dt;
    const double w = pulse.value_at(tm);
    const Eigensystem es = diagonalize(model, w);
    Eigen::VectorXcd phase(dim);
    for (Eigen::Index j = 0; j < dim; ++j) phase(j) = std::polar(1.0, -es.values(j) * 0.5 * dt);
    const Eigen::MatrixXcd vc = es.vectors.cast<cd>();
    Eigen::MatrixXcd uh = Eigen::MatrixXcd::Identity(full, full);
    uh.topLeftCorner(dim, dim) = vc * phase.asDiagonal() * vc.adjoint();

    if (!jumps.empty()) tracker.update(es);

    struct Active {
      double gamma;
      Eigen::VectorXcd a;
      Eigen::VectorXcd b;
    };
    std::vector<Active> active;
    for (const auto& j : jumps) {
      const double g = j.rate(tm);
      if (g < 0.0) throw DomainError("negative jump rate");
      if (g == 0.0) continue;
      Active act{g, Eigen::VectorXcd::Zero(full), Eigen::VectorXcd::Zero(full)};
      act.b.head(dim) = tracker.vectors.col(j.source).cast<cd>();
      if (j.target) {
        act.a.head(dim) = tracker.vectors.col(*j.target).cast<cd>();
      } else {
        act.a(dim) = 1.0;
      }
      active.push_back(std::move(act));
    }
    auto dissipator = [&](const Eigen::MatrixXcd& r) {
      Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(full, full);
      for (const auto& act : active) {
        const Eigen::VectorXcd rb = r * act.b;                       // rho |b>
        const Eigen::RowVectorXcd br = act.b.adjoint() * r;          // <b| rho
        const cd bb = act.b.dot(rb);                                 // <b|rho|b>
        out.noalias() += act.gamma * bb * act.a * act.a.adjoint();
        out.noalias() -= 0.5 * act.gamma * (act.b * br + rb * act.b.adjoint());
      }
      return out;
    };

    rho = uh * rho * uh.adjoint();
    if (!active.empty()) {
      const Eigen::MatrixXcd k1 = dissipator(rho);
      const Eigen::MatrixXcd k2 = dissipator(rho + 0.5 * dt * k1);
      const Eigen::MatrixXcd k3 = dissipator(rho + 0.5 * dt * k2);
      const Eigen::MatrixXcd k4 = dissipator(rho + dt * k3);
      rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rho = uh * rho * uh.adjoint();
    if (unitary_out) u_total = uh * uh * u_total;
  }
  if (unitary_out) *unitary_out = std::move(u_total);
  return rho;
}

Eigen::VectorXcd embed(const Eigen::MatrixXd& vs, const Eigen::VectorXcd& psi0) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(vs.rows() + 1);
  out.head(vs.rows()) = vs.cast<cd>() * psi0;
  return out;
}

}  // namespace

LindbladResult lindblad_propagate(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                                  const Eigen::VectorXcd& psi0, const LindbladOptions& options) {
  const Eigen::MatrixXd vs = idle_computational_vectors(model, pulse.idle_ghz);
  if (psi0.size() != vs.cols()) throw DomainError("initial state must have one amplitude per computational state");
  for (const auto& j : jumps) {
    if (j.source < 0 || j.source >= vs.cols() || (j.target && (*j.target < 0 || *j.target >= vs.cols()))) {
      throw DomainError("jump refers to a state outside the computational subspace");
    }
  }
  const Eigen::VectorXcd psi = embed(vs, psi0.normalized());
  const Eigen::MatrixXcd rho0 = psi * psi.adjoint();
  LindbladResult r;
  r.rho = evolve_operator(model, pulse, jumps, rho0, vs, options, nullptr);
  r.trace = r.rho.trace().real();
  if (std::abs(r.trace - 1.0) > options.trace_tolerance) {
    std::ostringstream os;
    os << "Lindblad integration lost trace (" << r.trace << ")";
    throw NumericalError(os.str());
  }
  const auto dim = static_cast<Eigen::Index>(model.dim());
  r.leaked_population = r.rho(dim, dim).real();
  const Eigen::MatrixXcd vsc = vs.cast<cd>();
  r.rho_comp = vsc.adjoint() * r.rho.topLeftCorner(dim, dim) * vsc;
  const Eigen::MatrixXcd herm = 0.5 * (r.rho + r.rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = solver.eigenvalues().minCoeff();
  return r;
}

double lindblad_state_error(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                            const Eigen::VectorXcd& psi0, const LindbladOptions& options) {
  const Eigen::MatrixXd vs = idle_computational_vectors(model, pulse.idle_ghz);
  const Eigen::VectorXcd psi = embed(vs, psi0.normalized());
  Eigen::MatrixXcd u;
  const Eigen::MatrixXcd rho = evolve_operator(model, pulse, jumps, psi * psi.adjoint(), vs, options, &u);
  if (std::abs(rho.trace().real() - 1.0) > options.trace_tolerance) {
    throw NumericalError("Lindblad integration lost trace");
  }
  const Eigen::VectorXcd ideal = u * psi;
  return 1.0 - ideal.dot(rho * ideal).real();
}

double lindblad_rb_error(const CircuitModel& model, const PulseShape& pulse, const std::vector<JumpSpec>& jumps,
                         const LindbladOptions& options) {
  const Eigen::MatrixXd vs = idle_computational_vectors(model, pulse.idle_ghz);
  if (vs.cols() != 4) throw DomainError("RB averaging needs exactly two qubits");
  const Eigen::Index full = vs.rows() + 1;
  // The master equation is linear: evolve the 16 matrix units once and
  // assemble every RB state from them.
  std::vector<Eigen::MatrixXcd> images(16);
  Eigen::MatrixXcd u;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Eigen::VectorXcd ei = embed(vs, Eigen::VectorXcd::Unit(4, i));
      const Eigen::VectorXcd ej = embed(vs, Eigen::VectorXcd::Unit(4, j));
      Eigen::MatrixXcd* uo = (i == 0 && j == 0) ? &u : nullptr;
      images[4 * i + j] = evolve_operator(model, pulse, jumps, ei * ej.adjoint(), vs, options, uo);
    }
  }
  double acc = 0.0;
  const auto& states = rb_states();
  for (const auto& st : states) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(full, full);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) rho += st.amplitudes(i) * std::conj(st.amplitudes(j)) * images[4 * i + j];
    }
    if (std::abs(rho.trace().real() - 1.0) > options.trace_tolerance) {
      throw NumericalError("Lindblad integration lost trace");
    }
    const Eigen::VectorXcd ideal = u * embed(vs, st.amplitudes);
    acc += 1.0 - ideal.dot(rho * ideal).real();
  }
  return acc / static_cast<double>(states.size());
}

}  // namespace czpulse
