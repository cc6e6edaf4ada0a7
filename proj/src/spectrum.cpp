#include "czpulse/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "czpulse/errors.hpp"
#include "czpulse/units.hpp"

namespace czpulse {

namespace {

void fix_phase(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index k = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&k);
    if (vectors(k, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

Eigensystem merge_blocks(Eigen::Index dim, const std::vector<std::vector<Eigen::Index>>& sectors,
                         const std::vector<Eigen::VectorXd>& block_values,
                         const std::vector<Eigen::MatrixXd>& block_vectors) {
  std::vector<std::pair<double, std::pair<std::size_t, Eigen::Index>>> order;
  order.reserve(static_cast<std::size_t>(dim));
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    for (Eigen::Index k = 0; k < block_values[s].size(); ++k) order.push_back({block_values[s](k), {s, k}});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Eigensystem es;
  es.values.resize(dim);
  es.vectors = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto [s, k] = order[static_cast<std::size_t>(col)].second;
    es.values(col) = order[static_cast<std::size_t>(col)].first;
    const auto& idx = sectors[s];
    for (std::size_t r = 0; r < idx.size(); ++r) {
      es.vectors(idx[r], col) = block_vectors[s](static_cast<Eigen::Index>(r), k);
    }
  }
  fix_phase(es.vectors);
  return es;
}

std::vector<std::vector<Eigen::Index>> pattern_sectors(const Eigen::MatrixXd& h) {
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](Eigen::Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (h(r, c) != 0.0) parent[root(r)] = root(c);
    }
  }
  std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) groups[root(k)].push_back(k);
  std::vector<std::vector<Eigen::Index>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.push_back(std::move(g));
  }
  return out;
}

void solve_block(const Eigen::MatrixXd& block, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  if (block.rows() == 1) {
    values = block.diagonal();
    vectors = Eigen::MatrixXd::Identity(1, 1);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  values = solver.eigenvalues();
  vectors = solver.eigenvectors();
}

// Greedy one-to-one assignment on descending overlap. Returns the new columns
// and the smallest accepted overlap.
std::pair<std::vector<Eigen::Index>, double> assign(const Eigen::MatrixXd& overlaps) {
  const Eigen::Index k = overlaps.cols();
  const Eigen::Index n = overlaps.rows();
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
  cand.reserve(static_cast<std::size_t>(k * n));
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double o = std::abs(overlaps(r, c));
      if (o > 1e-3) cand.emplace_back(o, r, c);
    }
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(k), -1);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  double worst = 1.0;
  Eigen::Index assigned = 0;
  for (const auto& [o, r, c] : cand) {
    if (cols[c] >= 0 || taken[r]) continue;
    cols[c] = r;
    taken[r] = true;
    worst = std::min(worst, o);
    if (++assigned == k) break;
  }
  if (assigned < k) worst = 0.0;
  return {cols, worst};
}

struct TrackState {
  double omega;
  Eigensystem es;
  std::vector<Eigen::Index> cols;
  Eigen::MatrixXd vectors;  // sign-continuous tracked vectors
};

TrackState advance(const CircuitModel& model, const TrackState& from, double omega, const TrackingOptions& opt,
                   int depth) {
  Eigensystem es = diagonalize(model, omega);
  const Eigen::MatrixXd overlaps = es.vectors.transpose() * from.vectors;
  auto [cols, worst] = assign(overlaps);
  if (worst < opt.continuity_overlap) {
    if (depth >= opt.max_refinements) {
      std::ostringstream os;
      os << "adiabatic tracking failed between " << from.omega << " and " << omega
         << " GHz (overlap " << worst << " after " << depth << " refinements)";
      throw TrackingError(os.str());
    }
    const TrackState mid = advance(model, from, 0.5 * (from.omega + omega), opt, depth + 1);
    return advance(model, mid, omega, opt, depth + 1);
  }
  TrackState next{omega, std::move(es), cols, Eigen::MatrixXd()};
  next.vectors.resize(from.vectors.rows(), from.vectors.cols());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Eigen::VectorXd v = next.es.vectors.col(cols[c]);
    if (v.dot(from.vectors.col(static_cast<Eigen::Index>(c))) < 0.0) v = -v;
    next.vectors.col(static_cast<Eigen::Index>(c)) = v;
  }
  return next;
}

bool has_computational(const CircuitSpec& spec, const std::vector<Occupation>& labels,
                       std::vector<std::size_t>& positions) {
  const auto comp = computational_labels(spec);
  positions.clear();
  for (const auto& c : comp) {
    auto it = std::find(labels.begin(), labels.end(), c);
    if (it == labels.end()) return false;
    positions.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  return true;
}

double resolve_anchor(const CircuitModel& model, double omega_c_ghz, const std::vector<Occupation>& labels,
                      const TrackingOptions& opt) {
  if (opt.anchor_ghz) return *opt.anchor_ghz;
  if (model.spec().idle_ghz) return *model.spec().idle_ghz;
  for (double w = omega_c_ghz; w <= kMaxCouplerGhz + 1e-12; w += 0.05) {
    if (label_columns(model.basis(), diagonalize(model, w), labels, opt.anchor_overlap)) return w;
  }
  throw TrackingError("no dispersive anchor found above " + std::to_string(omega_c_ghz) + " GHz");
}

}  // namespace

std::size_t SpectrumGrid::column(const Occupation& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw DomainError("label " + to_string(label) + " is not tracked");
  return static_cast<std::size_t>(it - labels.begin());
}

Eigensystem diagonalize(const HamiltonianMatrix& h) {
  const Eigen::MatrixXd& m = h.entries;
  if (m.rows() != m.cols()) throw DomainError("Hamiltonian must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DomainError("Hamiltonian is not Hermitian");
  }
  const auto sectors = pattern_sectors(m);
  std::vector<Eigen::VectorXd> vals(sectors.size());
  std::vector<Eigen::MatrixXd> vecs(sectors.size());
  for (std::size_t s = 0; s < sectors.size(); ++s) solve_block(m(sectors[s], sectors[s]), vals[s], vecs[s]);
  return merge_blocks(m.rows(), sectors, vals, vecs);
}

Eigensystem diagonalize(const CircuitModel& model, double omega_c_ghz) {
  const auto& sectors = model.sectors();
  std::vector<Eigen::VectorXd> vals(sectors.size());
  std::vector<Eigen::MatrixXd> vecs(sectors.size());
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    solve_block(model.sector_hamiltonian(s, omega_c_ghz), vals[s], vecs[s]);
  }
  return merge_blocks(static_cast<Eigen::Index>(model.dim()), sectors, vals, vecs);
}

std::optional<std::vector<Eigen::Index>> label_columns(const FockBasis& basis, const Eigensystem& es,
                                                       const std::vector<Occupation>& labels,
                                                       double threshold) {
  std::vector<Eigen::Index> cols;
  cols.reserve(labels.size());
  for (const auto& label : labels) {
    const Eigen::Index row = basis.index_of(label);
    Eigen::Index col = 0;
    const double best = es.vectors.row(row).cwiseAbs().maxCoeff(&col);
    if (best <= threshold) return std::nullopt;
    if (std::find(cols.begin(), cols.end(), col) != cols.end()) return std::nullopt;
    cols.push_back(col);
  }
  return cols;
}

SpectrumGrid track_adiabatic(const CircuitModel& model, const std::vector<double>& grid_ghz,
                             const std::vector<Occupation>& labels, const TrackingOptions& opt) {
  if (grid_ghz.empty()) throw DomainError("empty coupler-frequency grid");
  if (!std::is_sorted(grid_ghz.begin(), grid_ghz.end())) throw DomainError("grid must be ascending");
  const std::size_t n = grid_ghz.size();

  // Anchor selection.
  std::optional<std::size_t> anchor;
  std::optional<double> preferred = opt.anchor_ghz ? opt.anchor_ghz : model.spec().idle_ghz;
  std::vector<Eigensystem> cache(n);
  std::vector<bool> cached(n, false);
  auto eig_at = [&](std::size_t k) -> const Eigensystem& {
    if (!cached[k]) {
      cache[k] = diagonalize(model, grid_ghz[k]);
      cached[k] = true;
    }
    return cache[k];
  };
  std::vector<Eigen::Index> anchor_cols;
  if (preferred) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (std::abs(grid_ghz[k] - *preferred) < std::abs(grid_ghz[best] - *preferred)) best = k;
    }
    if (auto cols = label_columns(model.basis(), eig_at(best), labels, opt.anchor_overlap)) {
      anchor = best;
      anchor_cols = *cols;
    }
  } else {
    for (std::size_t k = n; k-- > 0;) {
      if (auto cols = label_columns(model.basis(), eig_at(k), labels, opt.anchor_overlap)) {
        anchor = k;
        anchor_cols = *cols;
        break;
      }
    }
  }
  if (!anchor) throw TrackingError("no dispersive anchor in the grid for the requested labels");

  SpectrumGrid out;
  out.omega_c_ghz = grid_ghz;
  out.labels = labels;
  out.anchor_sample = *anchor;
  out.eigenvalues.resize(n);
  out.tracked_vectors.resize(n);
  out.tracked_energies.resize(n);

  std::vector<std::size_t> comp_pos;
  const bool computational = has_computational(model.spec(), labels, comp_pos);
  const bool want_d = computational && opt.compute_d_factor;
  if (computational) out.zeta.assign(n, 0.0);
  if (want_d) {
    out.d_factor.assign(n, 0.0);
    out.d_divergent.assign(n, false);
  }
  out.g_eff.assign(n, std::numeric_limits<double>::quiet_NaN());

  auto record = [&](std::size_t k, const TrackState& st) {
    out.eigenvalues[k] = st.es.values;
    out.tracked_vectors[k] = st.vectors;
    Eigen::VectorXd e(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t c = 0; c < labels.size(); ++c) e(static_cast<Eigen::Index>(c)) = st.es.values(st.cols[c]);
    out.tracked_energies[k] = e;
    if (computational) {
      Eigen::VectorXd ce(static_cast<Eigen::Index>(comp_pos.size()));
      std::vector<Eigen::Index> ccols;
      for (std::size_t q = 0; q < comp_pos.size(); ++q) {
        ce(static_cast<Eigen::Index>(q)) = e(static_cast<Eigen::Index>(comp_pos[q]));
        ccols.push_back(st.cols[comp_pos[q]]);
      }
      if (ce.size() == 4) out.zeta[k] = zz_combination(ce);
      if (want_d) {
        const DFactor d = d_factor_from(model, grid_ghz[k], st.es, ccols);
        out.d_factor[k] = d.value;
        out.d_divergent[k] = d.divergent;
      }
    }
    if (model.spec().qubit_indices.size() == 2) {
      try {
        out.g_eff[k] = effective_coupling(model.spec(), grid_ghz[k]);
      } catch (const DomainError&) {
      }
    }
  };

  TrackState start{grid_ghz[*anchor], eig_at(*anchor), anchor_cols, Eigen::MatrixXd()};
  start.vectors.resize(static_cast<Eigen::Index>(model.dim()), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t c = 0; c < anchor_cols.size(); ++c) {
    start.vectors.col(static_cast<Eigen::Index>(c)) = start.es.vectors.col(anchor_cols[c]);
  }
  record(*anchor, start);

  TrackState st = start;
  for (std::size_t k = *anchor + 1; k < n; ++k) {
    st = advance(model, st, grid_ghz[k], opt, 0);
    record(k, st);
  }
  st = start;
  for (std::size_t k = *anchor; k-- > 0;) {
    st = advance(model, st, grid_ghz[k], opt, 0);
    record(k, st);
  }
  return out;
}

DFactor d_factor_from(const CircuitModel& model, double omega_c_ghz, const Eigensystem& es,
                      const std::vector<Eigen::Index>& cols) {
  const Eigen::MatrixXd dh = model.coupler_derivative(omega_c_ghz);
  Eigen::MatrixXd vs(es.vectors.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) vs.col(static_cast<Eigen::Index>(c)) = es.vectors.col(cols[c]);
  const Eigen::MatrixXd m = es.vectors.transpose() * (dh * vs);
  DFactor d;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double es_val = es.values(cols[c]);
    for (Eigen::Index j = 0; j < es.values.size(); ++j) {
      if (j == cols[c]) continue;
      const double elem = m(j, static_cast<Eigen::Index>(c));
      const double gap = es_val - es.values(j);
      if (std::abs(gap) < 1e-6) {
        if (std::abs(elem) > 1e-12) d.divergent = true;
        continue;
      }
      d.value += std::abs(elem) / (gap * gap);
    }
  }
  return d;
}

LabelledPoint labelled_point(const CircuitModel& model, double omega_c_ghz, const std::vector<Occupation>& labels,
                             const TrackingOptions& opt) {
  LabelledPoint p;
  p.labels = labels;
  p.eigensystem = diagonalize(model, omega_c_ghz);
  const bool explicit_anchor = opt.anchor_ghz || model.spec().idle_ghz;
  if (!explicit_anchor) {
    if (auto cols = label_columns(model.basis(), p.eigensystem, labels, opt.anchor_overlap)) {
      p.columns = *cols;
      return p;
    }
  }
  const double anchor = resolve_anchor(model, omega_c_ghz, labels, opt);
  if (std::abs(anchor - omega_c_ghz) < 1e-12) {
    auto cols = label_columns(model.basis(), p.eigensystem, labels, opt.anchor_overlap);
    if (!cols) throw TrackingError("anchor point is not dispersive for the requested labels");
    p.columns = *cols;
    return p;
  }
  const double span = std::abs(anchor - omega_c_ghz);
  const auto count = static_cast<std::size_t>(std::ceil(span / opt.max_step_ghz)) + 1;
  std::vector<double> grid = linspace(std::min(anchor, omega_c_ghz), std::max(anchor, omega_c_ghz), std::max<std::size_t>(count, 2));
  TrackingOptions sub = opt;
  sub.anchor_ghz = anchor;
  sub.compute_d_factor = false;
  const SpectrumGrid g = track_adiabatic(model, grid, labels, sub);
  const std::size_t target = omega_c_ghz < anchor ? 0 : grid.size() - 1;
  // Map tracked vectors back onto eigen columns of the freshly computed eigensystem.
  const Eigen::MatrixXd overlaps = p.eigensystem.vectors.transpose() * g.tracked_vectors[target];
  auto [cols, worst] = assign(overlaps);
  if (worst < 0.99) throw TrackingError("could not match tracked states at the target point");
  p.columns = cols;
  return p;
}

double zz_combination(const Eigen::VectorXd& e) {
  return e(3) - e(2) - e(1) + e(0);
}

double zz_strength(const CircuitModel& model, double omega_c_ghz, const TrackingOptions& opt) {
  const auto labels = computational_labels(model.spec());
  if (labels.size() != 4) throw DomainError("zz_strength needs exactly two qubits");
  const LabelledPoint p = labelled_point(model, omega_c_ghz, labels, opt);
  Eigen::VectorXd e(4);
  for (int k = 0; k < 4; ++k) e(k) = p.eigensystem.values(p.columns[static_cast<std::size_t>(k)]);
  return zz_combination(e);
}

double zz_strength(const CircuitSpec& spec, double omega_c_ghz, const TrackingOptions& opt) {
  return zz_strength(CircuitModel(spec), omega_c_ghz, opt);
}

DFactor d_factor(const CircuitModel& model, double omega_c_ghz, const TrackingOptions& opt) {
  const auto labels = computational_labels(model.spec());
  const LabelledPoint p = labelled_point(model, omega_c_ghz, labels, opt);
  return d_factor_from(model, omega_c_ghz, p.eigensystem, p.columns);
}

DFactor d_star(const CircuitModel& model, double omega_c_ghz, double omega_idle_ghz, const TrackingOptions& opt) {
  if (std::abs(omega_c_ghz - omega_idle_ghz) < 1e-12) {
    TrackingOptions sub = opt;
    sub.anchor_ghz = omega_idle_ghz;
    return d_factor(model, omega_idle_ghz, sub);
  }
  const double lo = std::min(omega_c_ghz, omega_idle_ghz);
  const double hi = std::max(omega_c_ghz, omega_idle_ghz);
  const auto count = std::max<std::size_t>(200, static_cast<std::size_t>(std::ceil((hi - lo) / opt.max_step_ghz)) + 1);
  TrackingOptions sub = opt;
  sub.anchor_ghz = omega_idle_ghz;
  const SpectrumGrid g = track_adiabatic(model, linspace(lo, hi, count), computational_labels(model.spec()), sub);
  DFactor out;
  for (std::size_t k = 0; k < g.d_factor.size(); ++k) {
    out.value = std::max(out.value, g.d_factor[k]);
    out.divergent = out.divergent || g.d_divergent[k];
  }
  return out;
}

std::vector<double> running_max_from(const std::vector<double>& values, std::size_t anchor) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  out[anchor] = values[anchor];
  for (std::size_t k = anchor + 1; k < values.size(); ++k) out[k] = std::max(out[k - 1], values[k]);
  for (std::size_t k = anchor; k-- > 0;) out[k] = std::max(out[k + 1], values[k]);
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) return {lo};
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

}  // namespace czpulse
