#include "ptbec/liouville.hpp"

#include "ptbec/csv.hpp"
#include "ptbec/errors.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace ptbec {

namespace {

// Weight tolerated (and dropped) outside the number-diagonal sector.
constexpr double kSectorSlack = 1e-14;

struct Jump {
  SparseMatrix op;
  double rate;
};

std::vector<Jump> jump_operators(const SystemParams& p, const TwoModeBasis& basis) {
  const BalancedRates r = p.rates();
  std::vector<Jump> jumps;
  if (r.loss > 0.0) jumps.push_back({mode_operator(basis, Site::One, Ladder::Annihilate).matrix(), r.loss});
  if (r.gain > 0.0) jumps.push_back({mode_operator(basis, Site::Two, Ladder::Create).matrix(), r.gain});
  return jumps;
}

}  // namespace

SparseOperator Liouvillian::superoperator() const {
  return SparseOperator(SparseMatrix(data_->matrix));
}

Index Liouvillian::slot(Index row, Index col) const {
  const Index dim = data_->basis.dim();
  if (row < 0 || col < 0 || row >= dim || col >= dim) {
    throw InvalidArgument("matrix element (" + std::to_string(row) + "," + std::to_string(col) +
                          ") outside the basis");
  }
  return data_->slot_of[static_cast<std::size_t>(row + col * dim)];
}

Eigen::VectorXcd Liouvillian::vectorize(const Eigen::MatrixXcd& rho) const {
  const Index dim = data_->basis.dim();
  if (rho.rows() != dim || rho.cols() != dim) {
    throw InvalidArgument("density matrix dimension does not match the basis");
  }
  Eigen::VectorXcd v(size());
  for (Index k = 0; k < size(); ++k) v[k] = rho(row_of(k), col_of(k));
  if (data_->sector == Sector::NumberDiagonal) {
    const double off = number_coherence(rho, data_->basis);
    if (off > kSectorSlack) {
      throw InvalidArgument("state has number coherence " + std::to_string(off) +
                            " outside the number-diagonal sector");
    }
  }
  return v;
}

Eigen::MatrixXcd Liouvillian::unvectorize(const Eigen::VectorXcd& v) const {
  if (v.size() != size()) throw InvalidArgument("vector length does not match the Liouvillian");
  const Index dim = data_->basis.dim();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (Index k = 0; k < size(); ++k) rho(row_of(k), col_of(k)) = v[k];
  return rho;
}

void Liouvillian::hermitize(Eigen::VectorXcd& v) const {
  for (Index k = 0; k < size(); ++k) {
    const Index a = adjoint_slot(k);
    if (a < k) continue;
    if (a == k) {
      v[k] = v[k].real();
    } else {
      const cplx mean = 0.5 * (v[k] + std::conj(v[a]));
      v[k] = mean;
      v[a] = std::conj(mean);
    }
  }
}

cplx Liouvillian::trace(const Eigen::VectorXcd& v) const {
  cplx t = 0.0;
  for (Index k : data_->diagonal) t += v[k];
  return t;
}

double Liouvillian::boundary_mass(const Eigen::VectorXcd& v) const {
  double m = 0.0;
  for (std::size_t i = 0; i < data_->diagonal.size(); ++i) {
    if (data_->basis.on_boundary(static_cast<Index>(i))) m += v[data_->diagonal[i]].real();
  }
  return m;
}

Liouvillian build_liouvillian(const SystemParams& params, const TwoModeBasis& basis, Sector sector) {
  params.validate();
  auto d = std::make_shared<Liouvillian::Data>();
  d->params = params;
  d->basis = basis;
  d->sector = sector;

  const Index dim = basis.dim();
  std::vector<int> total(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) total[static_cast<std::size_t>(i)] = basis.total(i);

  d->slot_of.assign(static_cast<std::size_t>(dim * dim), -1);
  for (Index c = 0; c < dim; ++c) {
    for (Index r = 0; r < dim; ++r) {
      if (sector == Sector::NumberDiagonal && total[static_cast<std::size_t>(r)] != total[static_cast<std::size_t>(c)]) {
        continue;
      }
      d->slot_of[static_cast<std::size_t>(r + c * dim)] = static_cast<Index>(d->rows.size());
      d->rows.push_back(r);
      d->cols.push_back(c);
    }
  }
  const Index n = static_cast<Index>(d->rows.size());
  d->adjoint.resize(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    d->adjoint[ks] = d->slot_of[static_cast<std::size_t>(d->cols[ks] + d->rows[ks] * dim)];
  }
  d->diagonal.resize(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) {
    d->diagonal[static_cast<std::size_t>(i)] = d->slot_of[static_cast<std::size_t>(i + i * dim)];
  }

  // L(rho) = -i (K rho - rho K^dag) + sum_c rate c rho c^dag with the
  // effective generator K = H - i/2 sum_c rate c^dag c. Column k of L is the
  // image of the unit matrix |r><c| for the element stored in slot k.
  const std::vector<Jump> jumps = jump_operators(params, basis);
  SparseMatrix K = hamiltonian(basis, params.J, params.U).matrix();
  for (const Jump& j : jumps) {
    K -= SparseMatrix(cplx(0.0, 0.5 * j.rate) * (SparseMatrix(j.op.adjoint()) * j.op));
  }
  K.makeCompressed();
  const cplx minus_i(0.0, -1.0);

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 12);
  auto emit = [&](Index r, Index c, Index k, cplx value) {
    const Index out = d->slot_of[static_cast<std::size_t>(r + c * dim)];
    // The generator never leaves the sector; a miss indicates a basis bug.
    if (out < 0) throw EngineError("Liouvillian couples outside its sector");
    trip.emplace_back(out, k, value);
  };
  for (Index k = 0; k < n; ++k) {
    const Index r = d->rows[static_cast<std::size_t>(k)];
    const Index c = d->cols[static_cast<std::size_t>(k)];
    // -i K |r><c|
    for (SparseMatrix::InnerIterator it(K, r); it; ++it) emit(it.row(), c, k, minus_i * it.value());
    // +i |r><c| K^dag : element (r, m) = conj(K(m, c))
    for (SparseMatrix::InnerIterator it(K, c); it; ++it) emit(r, it.row(), k, -minus_i * std::conj(it.value()));
    for (const Jump& j : jumps) {
      for (SparseMatrix::InnerIterator a(j.op, r); a; ++a) {
        for (SparseMatrix::InnerIterator b(j.op, c); b; ++b) {
          emit(a.row(), b.row(), k, j.rate * a.value() * std::conj(b.value()));
        }
      }
    }
  }
  d->matrix.resize(n, n);
  d->matrix.setFromTriplets(trip.begin(), trip.end());
  d->matrix.prune(cplx(0.0, 0.0), 0.0);
  d->matrix.makeCompressed();
  return Liouvillian(std::move(d));
}

Eigen::MatrixXcd apply_master_equation(const Eigen::MatrixXcd& rho, const SystemParams& params,
                                       const TwoModeBasis& basis) {
  params.validate();
  if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
    throw InvalidArgument("density matrix dimension does not match the basis");
  }
  const SparseMatrix H = hamiltonian(basis, params.J, params.U).matrix();
  const cplx i(0.0, 1.0);
  Eigen::MatrixXcd out = -i * (H * rho) + i * (rho * H);
  for (const Jump& j : jump_operators(params, basis)) {
    const SparseMatrix cdag = j.op.adjoint();
    const SparseMatrix cdc = cdag * j.op;
    const Eigen::MatrixXcd crho = j.op * rho;
    out += j.rate * (crho * cdag - 0.5 * (cdc * rho) - 0.5 * (rho * cdc));
  }
  return out;
}

void PropagationConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InvalidArgument("propagation tolerances must be > 0");
  if (!(max_step > 0.0)) throw InvalidArgument("max_step must be > 0");
  if (!(truncation_ceiling > 0.0)) throw InvalidArgument("truncation_ceiling must be > 0");
  if (std::isnan(sample_interval)) throw InvalidArgument("sample_interval must be a number");
}

OdeOptions PropagationConfig::ode() const {
  OdeOptions o;
  o.abs_tol = abs_tol;
  o.rel_tol = rel_tol;
  o.max_step = max_step;
  return o;
}

Trajectory propagate(const DensityMatrix& rho0, double t_final, const Liouvillian& L,
                     const PropagationConfig& config, const SnapshotObserver& observer) {
  config.validate();
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw InvalidArgument("t_final must be finite and >= 0");
  const TwoModeBasis& basis = L.basis();
  if (rho0.dim() != basis.dim()) throw InvalidArgument("initial state dimension does not match the basis");

  const double m0 = truncation_mass(rho0, basis);
  if (m0 > config.truncation_ceiling) {
    throw TruncationOverflowError("initial state already exceeds the truncation ceiling", m0,
                                  config.truncation_ceiling);
  }

  Trajectory traj;
  const MomentEvaluator moments(basis);
  Eigen::VectorXcd v = L.vectorize(rho0.matrix());

  auto rhs = [&L](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy.noalias() = L.matrix() * y; };
  auto post = [&](double t, Eigen::VectorXcd& y) {
    L.hermitize(y);
    const double mass = L.boundary_mass(y);
    if (mass > config.truncation_ceiling) {
      throw TruncationOverflowError("boundary-shell probability " + std::to_string(mass) + " exceeds ceiling " +
                                        std::to_string(config.truncation_ceiling) + " at t=" + std::to_string(t) +
                                        "; enlarge the cutoff",
                                    mass, config.truncation_ceiling);
    }
    traj.max_trace_error = std::max(traj.max_trace_error, std::abs(L.trace(y) - 1.0));
  };
  auto sample = [&](double t, const Eigen::VectorXcd& y) {
    Eigen::MatrixXcd rho = L.unvectorize(y);
    TrajectorySample s;
    s.t = t;
    s.moments = moments(rho);
    s.purity = s.moments.n > 0.0 ? purity(s.moments) : std::nan("");
    s.truncation_mass = truncation_mass(rho, basis);
    s.trace = rho.trace().real();
    traj.max_trace_error = std::max(traj.max_trace_error, std::abs(s.trace - 1.0));
    traj.samples.push_back(s);
    if (observer) observer(t, rho);
    if (config.keep_snapshots) traj.snapshots.push_back(std::move(rho));
  };

  traj.stats = integrate_dopri5(rhs, v, 0.0, t_final, config.sample_interval, config.ode(), sample, post);
  traj.final_state = L.unvectorize(v);
  return traj;
}

Trajectory propagate(const DensityMatrix& rho0, double t_final, const SystemParams& params,
                     const TwoModeBasis& basis, const PropagationConfig& config) {
  if (rho0.dim() != basis.dim()) throw InvalidArgument("initial state dimension does not match the basis");
  const Sector sector =
      number_coherence(rho0.matrix(), basis) <= kSectorSlack ? Sector::NumberDiagonal : Sector::Full;
  return propagate(rho0, t_final, build_liouvillian(params, basis, sector), config);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  CsvWriter w(os, {"t", "s_x", "s_y", "s_z", "n", "P", "Delta_nn", "truncation_mass"});
  for (const TrajectorySample& s : trajectory.samples) {
    w.row({s.t, s.moments.sx, s.moments.sy, s.moments.sz, s.moments.n, s.purity, s.moments.delta(3, 3),
           s.truncation_mass});
  }
}

}  // namespace ptbec
