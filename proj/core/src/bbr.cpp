#include "ptbec/bbr.hpp"

#include "ptbec/csv.hpp"
#include "ptbec/errors.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace ptbec {

namespace {

constexpr double kSingularityMargin = 1e-6;
constexpr double kPhysicalSlack = 1e-8;

using Vec14 = MomentState::Vector;

hierarchy::GeneratorRates generator_rates(const SystemParams& p, double U) {
  const BalancedRates r = p.rates();
  return {p.J, U, r.loss, r.gain};
}

hierarchy::EMoments e_moments(const MomentState& s) {
  Eigen::Vector4d means(0.5 * s.s[0], 0.5 * s.s[1], 0.5 * s.s[2], s.n);
  return hierarchy::from_bloch(means, s.delta);
}

MomentState rhs_from(const hierarchy::EMoments& e, const hierarchy::ThirdMoments& third,
                     const SystemParams& params, double U) {
  const hierarchy::EMoments de = hierarchy::derivative(e, third, generator_rates(params, U));
  Eigen::Vector4d dmeans;
  Eigen::Matrix4d ddelta;
  hierarchy::to_bloch_derivative(e, de, dmeans, ddelta);
  MomentState out;
  out.s = 2.0 * dmeans.head<3>();
  out.n = dmeans[3];
  out.delta = ddelta;
  return out;
}

Vec14 residual(const Vec14& x, const SystemParams& params, const BbrMode& mode) {
  return moment_rhs(MomentState::unpack(x), params, mode).pack();
}

double inf_norm(const Vec14& v) { return v.cwiseAbs().maxCoeff(); }

struct HybridFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const SystemParams* params;
  const BbrMode* mode;

  int inputs() const { return MomentState::kSize; }
  int values() const { return MomentState::kSize; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    try {
      f = residual(Vec14(x), *params, *mode);
    } catch (const SingularityError&) {
      return -1;
    }
    return 0;
  }
};

double acceptance_threshold(const Vec14& x, const RootSearchOptions& opt) {
  return std::max(opt.tolerance, opt.relative_floor * inf_norm(x));
}

struct NewtonOutcome {
  Vec14 x;
  double norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

NewtonOutcome damped_newton(const Vec14& x0, const SystemParams& params, const BbrMode& mode,
                            const RootSearchOptions& opt, int max_iterations) {
  NewtonOutcome out;
  out.x = x0;
  Vec14 f;
  try {
    f = residual(out.x, params, mode);
  } catch (const SingularityError&) {
    return out;
  }
  out.norm = inf_norm(f);
  Eigen::Matrix<double, 14, 14> jac;
  for (int it = 0; it < max_iterations; ++it) {
    if (out.norm <= acceptance_threshold(out.x, opt)) {
      out.converged = true;
      return out;
    }
    ++out.iterations;
    for (int k = 0; k < MomentState::kSize; ++k) {
      Vec14 xp = out.x;
      const double h = opt.fd_step * std::max(1.0, std::abs(out.x[k]));
      xp[k] += h;
      try {
        jac.col(k) = (residual(xp, params, mode) - f) / h;
      } catch (const SingularityError&) {
        xp[k] = out.x[k] - h;  // backward difference away from n = 1
        jac.col(k) = (f - residual(xp, params, mode)) / h;
      }
    }
    const Vec14 dx = jac.fullPivLu().solve(-f);
    if (!dx.allFinite()) return out;

    // Backtracking on the infinity norm; the full step is tried first.
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
      const Vec14 trial = out.x + lambda * dx;
      Vec14 ft;
      try {
        ft = residual(trial, params, mode);
      } catch (const SingularityError&) {
        continue;
      }
      const double nt = inf_norm(ft);
      if (std::isfinite(nt) && nt < (1.0 - 1e-4 * lambda) * out.norm) {
        out.x = trial;
        f = ft;
        out.norm = nt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  out.converged = out.norm <= acceptance_threshold(out.x, opt);
  return out;
}

RootResult finish(const Vec14& x, double norm, int iterations, const char* method, bool converged,
                  const RootSearchOptions& opt) {
  RootResult r;
  r.threshold = acceptance_threshold(x, opt);
  r.state = MomentState::unpack(x);
  r.residual = norm;
  r.iterations = iterations;
  r.method = method;
  if (!converged) {
    r.status = RootStatus::NotFound;
  } else {
    r.status = is_physical(r.state) ? RootStatus::Converged : RootStatus::Unphysical;
  }
  return r;
}

}  // namespace

MomentState::Vector MomentState::pack() const {
  Vector v;
  v << s[0], s[1], s[2], n, delta(0, 0), delta(0, 1), delta(0, 2), delta(0, 3), delta(1, 1), delta(1, 2),
      delta(1, 3), delta(2, 2), delta(2, 3), delta(3, 3);
  return v;
}

MomentState MomentState::unpack(const Vector& v) {
  MomentState m;
  m.s = v.head<3>();
  m.n = v[3];
  int k = 4;
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) m.delta(a, b) = m.delta(b, a) = v[k++];
  }
  return m;
}

MomentState MomentState::from_bloch(const BlochMoments& b) {
  MomentState m;
  m.s = Eigen::Vector3d(b.sx, b.sy, b.sz);
  m.n = b.n;
  m.delta = b.delta;
  return m;
}

BlochMoments MomentState::to_bloch() const {
  BlochMoments b;
  b.sx = s[0];
  b.sy = s[1];
  b.sz = s[2];
  b.n = n;
  b.delta = delta;
  return b;
}

double MomentState::number_uncertainty() const { return std::sqrt(std::max(0.0, 0.5 * delta(3, 3))); }

double BbrMode::interaction(double n) const {
  if (kind == Kind::FixedU) return value;
  if (!(n > 1.0 + kSingularityMargin)) {
    throw SingularityError("constant-g interaction U = g/(n-1) is singular at n = " + std::to_string(n));
  }
  return value / (n - 1.0);
}

double BbrMode::macroscopic_g(int N0) const { return kind == Kind::FixedU ? value * (N0 - 1.0) : value; }

std::string BbrMode::describe() const {
  std::ostringstream os;
  os << (kind == Kind::FixedU ? "fixed-U(U=" : "constant-g(g=") << value << ')';
  return os.str();
}

MomentState moment_rhs(const MomentState& state, const SystemParams& params, const BbrMode& mode) {
  const double U = mode.interaction(state.n);
  const hierarchy::EMoments e = e_moments(state);
  // Third moments only enter through the interaction.
  const hierarchy::ThirdMoments third =
      U == 0.0 ? hierarchy::ThirdMoments{} : hierarchy::factorized_third_moments(e);
  return rhs_from(e, third, params, U);
}

MomentState moment_rhs(const MomentState& state, const SystemParams& params, double U,
                       const hierarchy::ThirdMoments& third) {
  return rhs_from(e_moments(state), third, params, U);
}

MomentState pure_state_moments(double theta, double phi, int N0) {
  if (N0 < 1) throw InvalidArgument("N0 must be >= 1");
  const Eigen::Vector3d e(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  MomentState m;
  m.s = N0 * e;
  m.n = N0;
  m.delta.topLeftCorner<3, 3>() = 0.5 * N0 * (Eigen::Matrix3d::Identity() - e * e.transpose());
  return m;
}

BbrTrajectory integrate(const MomentState& initial, double t_final, const SystemParams& params,
                        const BbrMode& mode, const OdeOptions& options, double sample_dt) {
  params.validate();
  BbrTrajectory traj;
  Vec14 y = initial.pack();
  auto rhs = [&](double, const Vec14& x, Vec14& dx) { dx = moment_rhs(MomentState::unpack(x), params, mode).pack(); };
  auto sample = [&](double t, const Vec14& x) {
    BbrSample s;
    s.t = t;
    s.state = MomentState::unpack(x);
    s.purity = s.state.n > 0.0 ? s.state.purity() : std::nan("");
    traj.samples.push_back(s);
  };
  traj.stats = integrate_dopri5(rhs, y, 0.0, t_final, sample_dt, options, sample);
  return traj;
}

bool is_physical(const MomentState& state) {
  if (!(state.n > 0.0)) return false;
  if (!(state.purity() <= 1.0 + kPhysicalSlack)) return false;
  for (int a = 0; a < 4; ++a) {
    if (!(state.delta(a, a) >= -kPhysicalSlack)) return false;
  }
  return true;
}

RootResult steady_root_search(const SystemParams& params, const BbrMode& mode, const MomentState& guess,
                              const RootSearchOptions& options) {
  params.validate();
  if (!(options.tolerance > 0.0) || !(options.relative_floor >= 0.0) || options.max_iterations < 1) {
    throw InvalidArgument("root search needs tolerance > 0, relative_floor >= 0 and max_iterations >= 1");
  }
  const NewtonOutcome newton = damped_newton(guess.pack(), params, mode, options, options.max_iterations);
  if (newton.converged || !options.allow_fallback) {
    return finish(newton.x, newton.norm, newton.iterations, "newton", newton.converged, options);
  }

  Eigen::VectorXd x = std::isfinite(newton.norm) ? Eigen::VectorXd(newton.x) : Eigen::VectorXd(guess.pack());
  HybridFunctor functor{&params, &mode};
  Eigen::HybridNonLinearSolver<HybridFunctor> solver(functor);
  solver.parameters.maxfev = 200 * (MomentState::kSize + 1);
  solver.hybrd1(x, 1e-14);
  // Polish the hybrid result with Newton; it ends within reach of the root.
  const NewtonOutcome polish = damped_newton(Vec14(x), params, mode, options, 50);
  const int iterations = newton.iterations + static_cast<int>(solver.nfev) + polish.iterations;
  return finish(polish.x, polish.norm, iterations, "hybrid", polish.converged, options);
}

MomentState noninteracting_steady_moments(const SystemParams& params) {
  params.validate();
  if (!(params.gamma > 0.0)) throw InvalidArgument("the steady state needs gamma > 0");
  const BbrMode free = BbrMode::fixed_u(0.0);
  const Vec14 b = residual(Vec14::Zero(), params, free);
  Eigen::Matrix<double, 14, 14> A;
  for (int k = 0; k < MomentState::kSize; ++k) A.col(k) = residual(Vec14::Unit(k), params, free) - b;
  const auto lu = A.fullPivLu();
  if (lu.rank() < MomentState::kSize) {
    throw DivergenceError("U = 0 moment equations are singular at gamma = " + std::to_string(params.gamma));
  }
  return MomentState::unpack(lu.solve(-b));
}

RootResult steady_state_by_continuation(const SystemParams& params, const BbrMode& mode,
                                        const RootSearchOptions& options, int ramp_steps) {
  if (ramp_steps < 1) throw InvalidArgument("ramp_steps must be >= 1");
  MomentState state = noninteracting_steady_moments(params);
  RootResult r;
  if (mode.value == 0.0) return steady_root_search(params, mode, state, options);
  for (int k = 1; k <= ramp_steps; ++k) {
    BbrMode step = mode;
    step.value = mode.value * k / ramp_steps;
    r = steady_root_search(params, step, state, options);
    if (!r.found()) return r;
    state = r.state;
  }
  return r;
}

Branch trace_branch(double J, int N0, const BbrMode& mode, const std::vector<double>& gammas,
                    const BranchOptions& options) {
  if (!std::is_sorted(gammas.begin(), gammas.end())) throw InvalidArgument("gamma grid must be increasing");
  const double g_report = mode.macroscopic_g(N0);
  auto params_at = [&](double gamma) {
    SystemParams p;
    p.J = J;
    p.N0 = N0;
    p.gamma = gamma;
    return p;
  };
  auto solve_from = [&](double gamma, const MomentState& guess) {
    return steady_root_search(params_at(gamma), mode, guess, options.root);
  };

  Branch branch;
  RootResult anchor = steady_state_by_continuation(params_at(options.gamma_start), mode, options.root);
  bool alive = anchor.physical();
  double last_gamma = options.gamma_start;
  MomentState last_state = anchor.state;
  if (!alive) branch.boundary = options.gamma_start;

  for (double gamma : gammas) {
    BranchPoint pt;
    pt.gamma = gamma;
    pt.g = g_report;
    if (gamma <= 0.0 || !alive) {
      branch.points.push_back(pt);
      continue;
    }
    RootResult r;
    if (gamma < options.gamma_start) {
      r = steady_state_by_continuation(params_at(gamma), mode, options.root);
    } else {
      // March from the last accepted point in bounded increments.
      const double max_step = 0.05;
      const int substeps = std::max(1, static_cast<int>(std::ceil((gamma - last_gamma) / max_step)));
      MomentState guess = last_state;
      double reached = last_gamma;
      double failed_at = std::numeric_limits<double>::quiet_NaN();
      for (int k = 1; k <= substeps; ++k) {
        const double gk = last_gamma + (gamma - last_gamma) * k / substeps;
        r = solve_from(gk, guess);
        if (!r.physical()) {
          failed_at = gk;
          break;
        }
        guess = r.state;
        reached = gk;
      }
      if (!std::isnan(failed_at)) {
        // Bisect between the last existing gamma and the failure.
        double lo = reached, hi = failed_at;
        MomentState lo_state = guess;
        while (hi - lo > options.boundary_resolution) {
          const double mid = 0.5 * (lo + hi);
          const RootResult m = solve_from(mid, lo_state);
          if (m.physical()) {
            lo = mid;
            lo_state = m.state;
          } else {
            hi = mid;
          }
        }
        branch.boundary = lo;
        alive = false;
        branch.points.push_back(pt);
        continue;
      }
      last_gamma = gamma;
      last_state = r.state;
    }
    if (r.physical()) {
      pt.exists = true;
      pt.state = r.state;
      pt.purity = r.state.purity();
      pt.residual = r.residual;
    }
    branch.points.push_back(pt);
  }
  return branch;
}

void write_sweep_csv(std::ostream& os, const std::vector<BranchPoint>& points) {
  CsvWriter w(os, {"gamma", "g", "exists", "s_x", "s_y", "s_z", "n", "P", "Delta_n"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const BranchPoint& p : points) {
    if (p.exists) {
      w.row({p.gamma, p.g, 1.0, p.state.s[0], p.state.s[1], p.state.s[2], p.state.n, p.purity,
             p.state.number_uncertainty()});
    } else {
      w.row({p.gamma, p.g, 0.0, nan, nan, nan, nan, nan, nan});
    }
  }
}

}  // namespace ptbec
