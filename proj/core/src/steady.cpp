#include "ptbec/steady.hpp"

#include "ptbec/csv.hpp"
#include "ptbec/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace ptbec {

namespace {

using RowMatrix = Liouvillian::RowMajorMatrix;

struct KrylovOutcome {
  Eigen::VectorXcd x;
  int iterations = 0;
  double error = 0.0;
};

template <class Precond>
KrylovOutcome run_gmres(const RowMatrix& A, const Eigen::VectorXcd& b, const Eigen::VectorXcd& x0,
                        const SteadySolveConfig& cfg, double rel_tol, int max_iterations) {
  Eigen::GMRES<RowMatrix, Precond> gmres;
  gmres.set_restart(cfg.restart);
  gmres.setMaxIterations(max_iterations);
  gmres.setTolerance(rel_tol);
  gmres.compute(A);
  KrylovOutcome out;
  out.x = gmres.solveWithGuess(b, x0);
  out.iterations = static_cast<int>(gmres.iterations());
  out.error = gmres.error();
  return out;
}

KrylovOutcome krylov(const RowMatrix& A, const Eigen::VectorXcd& b, const Eigen::VectorXcd& x0,
                     const SteadySolveConfig& cfg, double rel_tol, int max_iterations) {
  switch (cfg.preconditioner) {
    case Preconditioner::Jacobi:
      return run_gmres<Eigen::DiagonalPreconditioner<cplx>>(A, b, x0, cfg, rel_tol, max_iterations);
    case Preconditioner::IncompleteLUT:
      return run_gmres<Eigen::IncompleteLUT<cplx>>(A, b, x0, cfg, rel_tol, max_iterations);
    case Preconditioner::None:
      break;
  }
  return run_gmres<Eigen::IdentityPreconditioner>(A, b, x0, cfg, rel_tol, max_iterations);
}

const char* preconditioner_name(Preconditioner p) {
  switch (p) {
    case Preconditioner::Jacobi: return "jacobi";
    case Preconditioner::IncompleteLUT: return "ilut";
    case Preconditioner::None: break;
  }
  return "none";
}

// Liouvillian with the balance row of rho_00 replaced by sum_i rho_ii = 1.
RowMatrix constrained_system(const Liouvillian& L, Index constraint_row) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(L.matrix().nonZeros()) + L.diagonal_slots().size());
  for (Index r = 0; r < L.matrix().outerSize(); ++r) {
    if (r == constraint_row) continue;
    for (RowMatrix::InnerIterator it(L.matrix(), r); it; ++it) trip.emplace_back(r, it.col(), it.value());
  }
  for (Index k : L.diagonal_slots()) trip.emplace_back(constraint_row, k, cplx(1.0, 0.0));
  RowMatrix A(L.size(), L.size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

Eigen::VectorXcd start_vector(const Liouvillian& L, const SystemParams& params, StartVector kind) {
  const TwoModeBasis& basis = L.basis();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(L.size());
  const BalancedRates r = params.rates();
  const double xi = r.gain / r.loss;
  double total = 0.0;
  for (Index i = 0; i < basis.dim(); ++i) {
    const auto [n1, n2] = basis.occupation(i);
    const double p = kind == StartVector::GeometricProduct ? std::pow(xi, n1 + n2) : 1.0;
    x[L.diagonal_slots()[static_cast<std::size_t>(i)]] = p;
    total += p;
  }
  return x / total;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& d, double t_from) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_from || !(d[k] > 0.0)) continue;
    const double y = std::log(d[k]);
    sx += t[k];
    sy += y;
    sxx += t[k] * t[k];
    sxy += t[k] * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : -(n * sxy - sx * sy) / den;
}

}  // namespace

void SteadySolveConfig::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("steady-state tolerance must be > 0");
  if (max_iterations < 1 || restart < 1) throw InvalidArgument("max_iterations and restart must be >= 1");
  if (!(truncation_ceiling > 0.0)) throw InvalidArgument("truncation_ceiling must be > 0");
  if (!(clip_threshold >= 0.0)) throw InvalidArgument("clip_threshold must be >= 0");
}

SteadyState solve_steady(const SystemParams& params, const TwoModeBasis& basis, const SteadySolveConfig& config) {
  config.validate();
  params.validate();
  if (!(params.gamma > 0.0)) {
    throw InvalidArgument("steady state is not unique at gamma = 0; a family of stationary states exists");
  }
  const Liouvillian L = build_liouvillian(params, basis, Sector::NumberDiagonal);
  const Index constraint_row = L.diagonal_slots().front();
  const RowMatrix A = constrained_system(L, constraint_row);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(L.size());
  b[constraint_row] = 1.0;

  SteadyDiagnostics diag;
  diag.system_size = L.size();
  diag.preconditioner = preconditioner_name(config.preconditioner);

  // Restarted solves from the refined guess until the generator residual,
  // measured directly, meets the contract.
  Eigen::VectorXcd x = start_vector(L, params, config.start);
  double rel_tol = 1e-2 * config.tolerance;
  double residual = std::numeric_limits<double>::infinity();
  int remaining = config.max_iterations;
  while (remaining > 0) {
    const KrylovOutcome k = krylov(A, b, x, config, rel_tol, remaining);
    x = k.x;
    diag.iterations += k.iterations;
    diag.solver_residual = k.error;
    ++diag.solves;
    remaining -= std::max(1, k.iterations);
    L.hermitize(x);
    x /= L.trace(x);
    residual = (L.apply(x)).cwiseAbs().maxCoeff();
    if (residual < 0.5 * config.tolerance) break;
    if (k.iterations == 0) rel_tol *= 0.1;
    if (diag.solves > 50) break;
  }
  if (!(residual < config.tolerance)) {
    throw ConvergenceError("steady-state GMRES did not reach max|L(rho)| < " + std::to_string(config.tolerance) +
                               " (achieved " + std::to_string(residual) + " after " +
                               std::to_string(diag.iterations) + " iterations)",
                           residual, diag.iterations);
  }

  Eigen::MatrixXcd rho = L.unvectorize(x);
  diag.hermiticity_defect = 0.5 * max_abs(rho - rho.adjoint());
  rho = 0.5 * (rho + rho.adjoint()).eval();

  // Clip negligible negative eigenvalues block by block (rho is block
  // diagonal in the total particle number).
  Eigen::MatrixXcd clipped = rho;
  double floor = std::numeric_limits<double>::infinity();
  int n_clipped = 0;
  double w_clipped = 0.0;
  for (const auto& idx : number_sectors(basis)) {
    const auto m = static_cast<Index>(idx.size());
    Eigen::MatrixXcd block(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index c = 0; c < m; ++c) block(a, c) = rho(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
    Eigen::VectorXd lam = es.eigenvalues();
    floor = std::min(floor, lam.minCoeff());
    bool touched = false;
    for (Index a = 0; a < m; ++a) {
      if (lam[a] < 0.0 && -lam[a] < config.clip_threshold) {
        w_clipped += lam[a];
        lam[a] = 0.0;
        ++n_clipped;
        touched = true;
      }
    }
    if (!touched) continue;
    const Eigen::MatrixXcd rebuilt = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    for (Index a = 0; a < m; ++a) {
      for (Index c = 0; c < m; ++c) {
        clipped(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]) = rebuilt(a, c);
      }
    }
  }
  if (n_clipped > 0) {
    clipped /= clipped.trace().real();
    // Keep the clipped state only if it still satisfies the residual contract.
    if (max_abs(apply_master_equation(clipped, params, basis)) < config.tolerance) {
      rho = clipped;
      diag.clipped_eigenvalues = n_clipped;
      diag.clipped_weight = w_clipped;
      floor = std::max(floor, 0.0);
    }
  }
  diag.trace_correction = std::abs(rho.trace().real() - 1.0);
  rho /= rho.trace().real();
  diag.eigenvalue_floor = floor;

  diag.residual = max_abs(apply_master_equation(rho, params, basis));
  if (!(diag.residual < config.tolerance)) {
    throw ConvergenceError("steady state misses the residual contract after post-processing (max|L(rho)| = " +
                               std::to_string(diag.residual) + ")",
                           diag.residual, diag.iterations);
  }
  diag.truncation_mass = truncation_mass(rho, basis);
  if (diag.truncation_mass > config.truncation_ceiling) {
    throw TruncationOverflowError("steady state puts " + std::to_string(diag.truncation_mass) +
                                      " probability on the boundary shell (ceiling " +
                                      std::to_string(config.truncation_ceiling) + "); enlarge the cutoff",
                                  diag.truncation_mass, config.truncation_ceiling);
  }

  SteadyState out;
  out.rho = std::move(rho);
  out.moments = MomentEvaluator(basis)(out.rho);
  out.purity = purity(out.moments);
  out.number_uncertainty = std::sqrt(std::max(0.0, 0.5 * out.moments.delta(3, 3)));
  out.diagnostics = diag;
  return out;
}

AttractorReport verify_attractor(const Eigen::MatrixXcd& rho_ss, const SystemParams& params,
                                 const TwoModeBasis& basis, double scale, double t_horizon,
                                 const PropagationConfig& propagation) {
  if (!(scale >= 0.0) || !(scale <= 1.0)) throw InvalidArgument("perturbation scale must lie in [0, 1]");
  if (!(t_horizon > 0.0)) throw InvalidArgument("t_horizon must be > 0");
  if (params.N0 > basis.cutoff()) throw InvalidArgument("probe states need N0 <= cutoff");
  const Liouvillian L = build_liouvillian(params, basis, Sector::NumberDiagonal);

  struct Probe {
    std::string label;
    Eigen::MatrixXcd rho;
  };
  const Eigen::VectorXcd coherent = coherent_state(basis, params.N0, std::numbers::pi / 2.0, 0.0);
  const std::vector<Probe> probes{
      {"site1", DensityMatrix::basis_state(basis, params.N0, 0).matrix()},
      {"site2", DensityMatrix::basis_state(basis, 0, params.N0).matrix()},
      {"binomial", DensityMatrix::pure(coherent).matrix()},
  };

  AttractorReport report;
  for (const Probe& probe : probes) {
    AttractorRun run;
    run.label = probe.label;
    const DensityMatrix rho0((1.0 - scale) * rho_ss + scale * probe.rho);
    auto observe = [&](double t, const Eigen::MatrixXcd& rho) {
      run.times.push_back(t);
      run.distances.push_back(trace_distance(rho, rho_ss, basis));
    };
    (void)propagate(rho0, t_horizon, L, propagation, observe);
    run.fitted_rate = fit_decay_rate(run.times, run.distances, 0.5 * t_horizon);
    for (std::size_t k = 1; k < run.times.size(); ++k) {
      if (run.times[k] < 0.25 * t_horizon) continue;
      if (run.distances[k] > run.distances[k - 1] * (1.0 + 1e-9) + 1e-14) run.monotone_after_transient = false;
    }
    report.mean_rate += run.fitted_rate / static_cast<double>(probes.size());
    report.runs.push_back(std::move(run));
  }
  return report;
}

void write_steady_diagonal_csv(std::ostream& os, const Eigen::MatrixXcd& rho, const TwoModeBasis& basis) {
  CsvWriter w(os, {"n1", "n2", "p"});
  for (Index i = 0; i < basis.dim(); ++i) {
    const auto [n1, n2] = basis.occupation(i);
    w.row({static_cast<double>(n1), static_cast<double>(n2), rho(i, i).real()});
  }
}

}  // namespace ptbec
