#include "ptbec_cli/scenarios.hpp"

#include "ptbec/bbr.hpp"
#include "ptbec/closedform.hpp"
#include "ptbec/csv.hpp"
#include "ptbec/errors.hpp"
#include "ptbec/fock.hpp"
#include "ptbec/liouville.hpp"
#include "ptbec/meanfield.hpp"
#include "ptbec/steady.hpp"

#include <Eigen/Core>
#include <openssl/crypto.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#ifndef PTBEC_VERSION
#define PTBEC_VERSION "unknown"
#endif

namespace ptbec::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs task(i) for i in [0, n) on up to `threads` workers. Results are
/// placed by index by the caller, so the order of completion never matters.
/// The exception of the lowest failing index is rethrown after the join.
template <class Task>
void parallel_for(int n, int threads, Task&& task) {
  const int workers = std::clamp(threads, 1, std::max(1, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SystemParams params_of(const ScenarioConfig& c) {
  SystemParams p;
  p.J = c.real("J");
  p.N0 = c.integer("N0");
  if (c.has("gamma")) p.gamma = c.real("gamma");
  if (c.has("g") || c.has("U")) p.U = c.interaction_U();
  return p;
}

BbrMode mode_of(const std::string& mode, double g, int N0) {
  if (mode == "constant-g") return BbrMode::constant_g(g);
  return BbrMode::fixed_u(g == 0.0 ? 0.0 : g / (N0 - 1.0));
}

Preconditioner preconditioner_of(const std::string& name) {
  if (name == "none") return Preconditioner::None;
  if (name == "jacobi") return Preconditioner::Jacobi;
  return Preconditioner::IncompleteLUT;
}

std::string first_moments_csv(const std::vector<double>& times, const std::vector<FirstMoments>& ms) {
  std::ostringstream os;
  CsvWriter w(os, {"t", "s_x", "s_y", "s_z", "n", "sx_red", "sy_red", "sz_red"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const FirstMoments& m = ms[i];
    w.row({times[i], m.sx, m.sy, m.sz, m.n, m.sx / m.n, m.sy / m.n, m.sz / m.n});
  }
  return os.str();
}

json steady_summary(const SteadyState& st) {
  const SteadyDiagnostics& d = st.diagnostics;
  return json{
      {"moments", {{"s_x", st.moments.sx}, {"s_y", st.moments.sy}, {"s_z", st.moments.sz}, {"n", st.moments.n}}},
      {"purity", st.purity},
      {"Delta_n", st.number_uncertainty},
      {"residual", d.residual},
      {"truncation_mass", d.truncation_mass},
      {"eigenvalue_floor", d.eigenvalue_floor},
      {"solver",
       {{"preconditioner", d.preconditioner},
        {"system_size", d.system_size},
        {"iterations", d.iterations},
        {"solves", d.solves},
        {"solver_residual", d.solver_residual},
        {"hermiticity_defect", d.hermiticity_defect},
        {"clipped_eigenvalues", d.clipped_eigenvalues},
        {"clipped_weight", d.clipped_weight},
        {"trace_correction", d.trace_correction}}},
  };
}

SteadySolveConfig steady_config_of(const ScenarioConfig& c) {
  SteadySolveConfig s;
  s.tolerance = c.real("tolerance");
  s.truncation_ceiling = c.real("truncation_ceiling");
  s.preconditioner = preconditioner_of(c.text("preconditioner"));
  s.restart = c.integer("restart");
  s.max_iterations = c.integer("max_iterations");
  return s;
}

std::string sites_csv(const std::vector<double>& p1, const std::vector<double>& p2, const std::vector<double>* overlay) {
  std::ostringstream os;
  std::vector<std::string> header{"j", "p_site1", "p_site2"};
  if (overlay) header.push_back("p_geometric");
  CsvWriter w(os, header);
  for (std::size_t j = 0; j < p1.size(); ++j) {
    std::vector<double> row{static_cast<double>(j), p1[j], p2[j]};
    if (overlay) row.push_back((*overlay)[j]);
    w.row(row);
  }
  return os.str();
}

ScenarioOutput fig1(const ScenarioConfig& c) {
  SystemParams p = params_of(c);
  const auto gammas = linspace(c.real("gamma_min"), c.real("gamma_max"), c.integer("gamma_steps"));

  auto nonosci_at = [&](double gamma) -> std::optional<NonOscillatoryPair> {
    SystemParams q = p;
    q.gamma = gamma;
    try {
      return nonoscillatory_states(q);
    } catch (const EngineError&) {
      return std::nullopt;
    }
  };

  std::ostringstream os;
  CsvWriter w(os, {"gamma", "phi_minus", "phi_plus", "theta", "phi_pt_minus", "phi_pt_plus", "nonosci_exists",
                   "pt_exists"});
  std::optional<double> last_nonosci, first_missing;
  for (double gamma : gammas) {
    const auto pair = nonosci_at(gamma);
    std::optional<PtStationaryStates> pt;
    try {
      pt = pt_stationary_states(p.J, gamma);
    } catch (const PtBrokenError&) {
    }
    if (pair) {
      last_nonosci = gamma;
    } else if (last_nonosci && !first_missing) {
      first_missing = gamma;
    }
    w.row({gamma, pair ? pair->phi_minus : kNaN, pair ? pair->phi_plus : kNaN, pair ? pair->theta : kNaN,
           pt ? pt->ground.phi : kNaN, pt ? pt->excited.phi : kNaN, pair ? 1.0 : 0.0, pt ? 1.0 : 0.0});
  }

  ScenarioOutput out;
  out.files.emplace_back("fig1_nonosci.csv", os.str());
  json d;
  if (last_nonosci && first_missing) {
    double lo = *last_nonosci, hi = *first_missing;
    for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (nonosci_at(mid) ? lo : hi) = mid;
    }
    d["nonosci_coalescence_gamma"] = lo;
  } else {
    d["nonosci_coalescence_gamma"] = nullptr;
  }
  d["pt_coalescence_gamma"] = 2.0 * p.J;
  d["critical_gamma"] = critical_gamma(p.N0, p.J);
  out.diagnostics = std::move(d);
  return out;
}

ScenarioOutput fig2(const ScenarioConfig& c) {
  SystemParams p = params_of(c);
  const double t_final = c.real("t_final"), dt = c.real("sample_dt");
  const int n_samples = static_cast<int>(std::floor(t_final / dt + 1e-9));
  std::vector<double> times;
  for (int i = 0; i <= n_samples; ++i) times.push_back(i * dt);
  if (t_final - times.back() > 1e-9 * t_final) times.push_back(t_final);

  ScenarioOutput out;
  auto sample = [&](const OscillatorySolution& sol) {
    std::vector<FirstMoments> ms;
    for (double t : times) ms.push_back(sol.evaluate(t));
    return ms;
  };
  const double N = p.N0;
  const int K = c.integer("trajectories");
  for (int k = 0; k < K; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / K;
    const FirstMoments init{N * std::cos(phi), N * std::sin(phi), 0.0, N};
    out.files.emplace_back("fig2_oscillating_" + std::to_string(k) + ".csv",
                           first_moments_csv(times, sample(oscillatory_solution(init, p))));
  }

  const NonOscillatoryPair pair = nonoscillatory_states(p);
  json nonosci = json::object();
  for (const auto& [tag, phi] : {std::pair{"minus", pair.phi_minus}, std::pair{"plus", pair.phi_plus}}) {
    const FirstMoments init{N * std::sin(pair.theta) * std::cos(phi), N * std::sin(pair.theta) * std::sin(phi),
                            N * std::cos(pair.theta), N};
    const OscillatorySolution sol = oscillatory_solution(init, p);
    const auto ms = sample(sol);
    double drift = 0.0;
    for (const auto& m : ms) drift = std::max(drift, std::abs(m.sz - sol.alpha().a3));
    nonosci[tag] = {{"phi", phi}, {"kappa3", sol.kappa().kappa3}, {"max_sz_drift", drift}};
    out.files.emplace_back(std::string("fig2_nonosci_") + tag + ".csv", first_moments_csv(times, ms));
  }

  const PtStationaryStates pt = pt_stationary_states(p.J, p.gamma);
  OdeOptions ode;
  ode.abs_tol = c.real("tolerance");
  ode.rel_tol = c.real("rel_tol");
  const GpeTrajectory gpe = integrate_gpe(state_from_angles(pt.ground), t_final, p.J, 0.0, p.gamma, ode, dt);
  std::ostringstream os;
  write_gpe_csv(os, gpe);
  out.files.emplace_back("fig2_gpe_ground.csv", os.str());

  out.diagnostics = {{"theta", pair.theta},
                     {"nonoscillatory", nonosci},
                     {"gpe_ground", {{"phi", pt.ground.phi}, {"theta", pt.ground.theta}}},
                     {"gpe_steps", gpe.stats.accepted}};
  return out;
}

ScenarioOutput steady_scenario(const ScenarioConfig& c, bool figure) {
  const SystemParams p = params_of(c);
  const TwoModeBasis basis(c.integer("cutoff"));
  const SteadyState st = solve_steady(p, basis, steady_config_of(c));
  const DensityMatrix rho = st.density();
  const auto p1 = site_distribution(rho, basis, Site::One);
  const auto p2 = site_distribution(rho, basis, Site::Two);
  const std::string prefix = figure ? "fig3_" : "steady_";

  ScenarioOutput out;
  std::ostringstream diag;
  write_steady_diagonal_csv(diag, st.rho, basis);
  out.files.emplace_back(prefix + "diagonal.csv", diag.str());

  json summary = steady_summary(st);
  if (figure) {
    const SingleModeSteady single = single_mode_steady(p.gamma_gain(), p.gamma_loss());
    const auto geometric = single.probabilities(basis.cutoff());
    out.files.emplace_back(prefix + "sites.csv", sites_csv(p1, p2, &geometric));

    const auto q = total_number_distribution(rho, basis);
    const auto product = combined_product_probs(single.xi(), static_cast<int>(q.size()) - 1);
    std::ostringstream os;
    CsvWriter w(os, {"j", "q", "q_product"});
    for (std::size_t j = 0; j < q.size(); ++j) w.row({static_cast<double>(j), q[j], product[j]});
    out.files.emplace_back(prefix + "total.csv", os.str());
    summary["xi"] = single.xi();
  } else {
    out.files.emplace_back(prefix + "sites.csv", sites_csv(p1, p2, nullptr));
  }
  out.files.emplace_back(prefix + "summary.json", summary.dump(2) + "\n");
  out.diagnostics = std::move(summary);
  return out;
}

struct TracedBranch {
  double g = 0.0;
  Branch branch;
};

std::vector<TracedBranch> trace_all(const ScenarioConfig& c, const std::vector<double>& g_values, int threads) {
  const int N0 = c.integer("N0");
  const auto gammas = linspace(c.real("gamma_min"), c.real("gamma_max"), c.integer("gamma_steps"));
  BranchOptions opts;
  opts.boundary_resolution = c.real("boundary_resolution");
  opts.root.tolerance = c.real("tolerance");
  std::vector<TracedBranch> out(g_values.size());
  parallel_for(static_cast<int>(g_values.size()), threads, [&](int i) {
    const double g = g_values[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {g, trace_branch(c.real("J"), N0, mode_of(c.text("mode"), g, N0), gammas, opts)};
  });
  return out;
}

json branch_diagnostics(const std::vector<TracedBranch>& branches) {
  json arr = json::array();
  for (const auto& b : branches) {
    double worst = 0.0;
    int existing = 0;
    for (const auto& pt : b.branch.points) {
      if (!pt.exists) continue;
      ++existing;
      worst = std::max(worst, pt.residual);
    }
    arr.push_back({{"g", b.g},
                   {"gamma_crit", b.branch.boundary ? json(*b.branch.boundary) : json(nullptr)},
                   {"existing_points", existing},
                   {"max_residual", worst}});
  }
  return arr;
}

ScenarioOutput fig4(const ScenarioConfig& c, int threads) {
  const auto branches = trace_all(c, c.list("g_values"), threads);
  std::vector<BranchPoint> all;
  for (const auto& b : branches) all.insert(all.end(), b.branch.points.begin(), b.branch.points.end());
  ScenarioOutput out;
  std::ostringstream os;
  write_sweep_csv(os, all);
  out.files.emplace_back("fig4_bbr_components.csv", os.str());

  std::ostringstream free;
  CsvWriter w(free, {"gamma", "exists", "s_x", "s_y", "s_z", "n", "P", "Delta_n"});
  SystemParams p = params_of(c);
  for (double gamma : linspace(c.real("gamma_min"), c.real("gamma_max"), c.integer("gamma_steps"))) {
    p.gamma = gamma;
    std::optional<MomentState> m;
    if (gamma > 0.0) {
      try {
        m = noninteracting_steady_moments(p);
        if (!is_physical(*m)) m.reset();
      } catch (const DivergenceError&) {
      }
    }
    if (m) {
      w.row({gamma, 1.0, m->s[0], m->s[1], m->s[2], m->n, m->purity(), m->number_uncertainty()});
    } else {
      w.row({gamma, 0.0, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN});
    }
  }
  out.files.emplace_back("fig4_noninteracting.csv", free.str());
  out.diagnostics = {{"mode", c.text("mode")}, {"branches", branch_diagnostics(branches)}};
  return out;
}

ScenarioOutput fig5(const ScenarioConfig& c, int threads) {
  const auto branches = trace_all(c, linspace(c.real("g_min"), c.real("g_max"), c.integer("g_steps")), threads);
  ScenarioOutput out;
  std::ostringstream map, edge;
  CsvWriter wm(map, {"gamma", "g", "P", "exists"});
  CsvWriter we(edge, {"g", "gamma_crit", "found"});
  for (const auto& b : branches) {
    for (const auto& pt : b.branch.points) wm.row({pt.gamma, b.g, pt.exists ? pt.purity : kNaN, pt.exists ? 1.0 : 0.0});
    we.row({b.g, b.branch.boundary.value_or(kNaN), b.branch.boundary ? 1.0 : 0.0});
  }
  out.files.emplace_back("fig5_purity_map.csv", map.str());
  out.files.emplace_back("fig5_boundary.csv", edge.str());
  out.diagnostics = {{"mode", c.text("mode")}, {"branches", branch_diagnostics(branches)}};
  return out;
}

ScenarioOutput custom_propagate(const ScenarioConfig& c) {
  const SystemParams p = params_of(c);
  const double theta = c.real("theta"), phi = c.real("phi"), t_final = c.real("t_final");
  ScenarioOutput out;
  std::ostringstream os;
  if (c.text("engine") == "master") {
    const TwoModeBasis basis(c.integer("cutoff"));
    PropagationConfig cfg;
    cfg.abs_tol = c.real("tolerance");
    cfg.rel_tol = c.real("rel_tol");
    cfg.sample_interval = c.real("sample_dt");
    cfg.truncation_ceiling = c.real("truncation_ceiling");
    const auto rho0 = DensityMatrix::pure(coherent_state(basis, p.N0, theta, phi));
    const Trajectory traj = propagate(rho0, t_final, p, basis, cfg);
    write_trajectory_csv(os, traj);
    out.files.emplace_back("trajectory.csv", os.str());
    out.diagnostics = {{"engine", "master"},
                       {"steps_accepted", traj.stats.accepted},
                       {"steps_rejected", traj.stats.rejected},
                       {"max_trace_error", traj.max_trace_error},
                       {"final_truncation_mass", traj.samples.back().truncation_mass}};
  } else {
    OdeOptions ode;
    ode.abs_tol = c.real("tolerance");
    ode.rel_tol = c.real("rel_tol");
    const BbrMode mode = mode_of(c.text("mode"), c.interaction_g(), p.N0);
    const BbrTrajectory traj =
        integrate(pure_state_moments(theta, phi, p.N0), t_final, p, mode, ode, c.real("sample_dt"));
    CsvWriter w(os, {"t", "s_x", "s_y", "s_z", "n", "P", "Delta_n"});
    for (const auto& s : traj.samples) {
      w.row({s.t, s.state.s[0], s.state.s[1], s.state.s[2], s.state.n, s.purity, s.state.number_uncertainty()});
    }
    out.files.emplace_back("bbr_trajectory.csv", os.str());
    out.diagnostics = {{"engine", "bbr"}, {"mode", mode.describe()}, {"steps_accepted", traj.stats.accepted}};
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

template <class E>
[[noreturn]] void rethrow_with_context(const ScenarioConfig& c, const E& e) {
  const std::string what = "scenario " + std::string(scenario_name(c.scenario())) + ": " + e.what();
  throw E(what);
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw InvalidArgument("linspace needs at least one step");
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  return out;
}

ScenarioOutput compute(const ScenarioConfig& config, int threads) {
  switch (config.scenario()) {
    case Scenario::Fig1NonOsciSweep: return fig1(config);
    case Scenario::Fig2BlochTrajectories: return fig2(config);
    case Scenario::Fig3SteadyDistributions: return steady_scenario(config, true);
    case Scenario::Fig4BbrSteadyComponents: return fig4(config, threads);
    case Scenario::Fig5PurityMaps: return fig5(config, threads);
    case Scenario::CustomPropagate: return custom_propagate(config);
    case Scenario::CustomSteady: return steady_scenario(config, false);
  }
  throw std::logic_error("unhandled scenario");
}

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  ScenarioOutput result;
  try {
    result = compute(config, options.threads);
  } catch (const EngineError& e) {
    rethrow_with_context(config, e);
  } catch (const InvalidArgument& e) {
    rethrow_with_context(config, e);
  }

  OutputSet files(options.out_dir);
  for (const auto& [name, body] : result.files) files.write(name, body);

  json manifest;
  manifest["tool"] = "ptbec";
  manifest["scenario"] = scenario_name(config.scenario());
  json echo = json::object();
  for (const auto& [k, v] : config.echo()) echo[k] = v;
  manifest["config"] = std::move(echo);
  manifest["engine_versions"] = {
      {"ptbec", PTBEC_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"openssl", OpenSSL_version(OPENSSL_VERSION)},
  };
  manifest["threads"] = options.threads;
  manifest["started_utc"] = started_utc;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  manifest["diagnostics"] = result.diagnostics;
  files.commit(manifest);

  RunResult r;
  r.directory = files.directory();
  r.files = files.files();
  r.manifest = std::move(manifest);
  return r;
}

}  // namespace ptbec::cli
