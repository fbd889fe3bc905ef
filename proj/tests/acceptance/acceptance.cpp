// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when a criterion fails that is not a recorded known
// failure, or when a recorded known failure starts passing.

#include "ptbec/bbr.hpp"
#include "ptbec/closedform.hpp"
#include "ptbec/errors.hpp"
#include "ptbec/fock.hpp"
#include "ptbec/hierarchy.hpp"
#include "ptbec/liouville.hpp"
#include "ptbec/meanfield.hpp"
#include "ptbec/steady.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ptbec;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kC1SyLo = 0.74, kC1SyHi = 0.76, kC1PLo = 0.545, kC1PHi = 0.565;
constexpr double kC2Marginal = 0.01, kC2Combined = 0.02, kC2Ceiling = 1e-2;
constexpr int kC2Cutoff = 24;
constexpr double kC3Moments = 1e-6, kC3Boundary = 1e-8, kC3Horizon = 20.0;
constexpr int kC3Cutoff = 56;
constexpr double kC4Limit = 1e-5;
constexpr double kC5Sz = 1e-10, kC5Kappa3 = 1e-9;
constexpr double kC6Sy = 0.10;
constexpr double kC7Max = 0.99, kC7Grid = 0.9;
constexpr double kC8Rate = 0.25;
constexpr int kC8Cutoff = 46;
constexpr double kC9Rhs = 1e-5, kC9Step = 1e-4;
constexpr double kC10Velocity = 1e-10, kC10Distance = 1e-2;

const std::set<int> kKnownFailures{2, 6, 7};

struct Report {
  bool pass = true;
  std::vector<std::string> lines;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SystemParams params(double gamma, int N0, double U = 0.0) {
  SystemParams p;
  p.U = U;
  p.gamma = gamma;
  p.N0 = N0;
  return p;
}

std::vector<double> grid(double lo, double step, int count) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back(lo + step * k);
  return g;
}

// --- 1 ----------------------------------------------------------------------
void criterion1(Report& r) {
  const auto a = steady_alpha(params(1.5, 100));
  const double sy = a.sy_reduced(), P = purity(a.moments());
  r.require(sy >= kC1SyLo && sy <= kC1SyHi, fmt("s_y' = %.5f in [%.2f, %.2f]", sy, kC1SyLo, kC1SyHi));
  r.require(P >= kC1PLo && P <= kC1PHi, fmt("P = %.5f in [%.3f, %.3f]", P, kC1PLo, kC1PHi));
}

// --- 2 ----------------------------------------------------------------------
void criterion2(Report& r) {
  const int N0 = 5;
  const double g = 0.5;
  const auto p = params(0.5, N0, SystemParams::interaction_from_g(g, N0));
  SteadySolveConfig cfg;
  cfg.truncation_ceiling = kC2Ceiling;
  const TwoModeBasis b(kC2Cutoff);
  const auto ss = solve_steady(p, b, cfg);
  const DensityMatrix rho = ss.density();
  r.note(fmt("cutoff %d, residual %.2e, boundary mass %.3e (ceiling %.0e)", kC2Cutoff, ss.diagnostics.residual,
             ss.diagnostics.truncation_mass, kC2Ceiling));

  const auto geo = single_mode_steady(p.gamma_gain(), p.gamma_loss());
  const double xi = geo.xi();
  for (Site s : {Site::One, Site::Two}) {
    const auto pj = site_distribution(rho, b, s);
    double dev = 0.0;
    int at = 0;
    for (int j = 0; j <= kC2Cutoff; ++j) {
      const double d = std::abs(pj[static_cast<std::size_t>(j)] - geo.probability(j));
      if (d > dev) dev = d, at = j;
    }
    r.require(dev <= kC2Marginal, fmt("site %d marginal: max |p - (1-xi) xi^j| = %.4f at j = %d (limit %.2f)",
                                      static_cast<int>(s), dev, at, kC2Marginal));
  }

  const auto q = total_number_distribution(rho, b);
  const auto qp = combined_product_probs(xi, 2 * kC2Cutoff);
  double tail = 0.0, min_low = 1e300, max_high = -1e300;
  bool low_positive = true;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double excess = qp[j] - q[j];
    if (j < 5) {
      low_positive = low_positive && excess > 0.0;
      min_low = std::min(min_low, excess);
    } else {
      tail = std::max(tail, std::abs(excess));
      max_high = std::max(max_high, excess);
    }
  }
  r.require(tail <= kC2Combined, fmt("combined, j >= 5: max |q - q_product| = %.4f (limit %.2f)", tail, kC2Combined));
  r.require(low_positive && min_low > max_high,
            fmt("excess of the product law: min over j < 5 = %.4f > max over j >= 5 = %.4f", min_low, max_high));
}

// --- 3 ----------------------------------------------------------------------
void criterion3(Report& r) {
  const int N0 = 5;
  const auto p = params(0.5, N0);
  const TwoModeBasis b(kC3Cutoff);
  std::mt19937 rng(314159);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PropagationConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-10;
  cfg.sample_interval = 0.25;
  cfg.truncation_ceiling = kC3Boundary;
  for (int trial = 0; trial < 3; ++trial) {
    const double th = kPi * u(rng), ph = 2 * kPi * u(rng) - kPi;
    const auto rho0 = DensityMatrix::pure(coherent_state(b, N0, th, ph));
    const auto sol = oscillatory_solution(bloch_moments(rho0, b).first(), p);
    const auto traj = propagate(rho0, kC3Horizon, p, b, cfg);
    double dev = 0.0, mass = 0.0;
    for (const auto& s : traj.samples) {
      const auto ref = sol.evaluate(s.t);
      dev = std::max({dev, std::abs(s.moments.sx - ref.sx), std::abs(s.moments.sy - ref.sy),
                      std::abs(s.moments.sz - ref.sz), std::abs(s.moments.n - ref.n)});
      mass = std::max(mass, s.truncation_mass);
    }
    r.require(dev < kC3Moments && mass < kC3Boundary,
              fmt("state (theta %.3f, phi %.3f): max moment error %.2e over %zu samples, max boundary mass %.1e", th, ph,
                  dev, traj.samples.size(), mass));
  }
}

// --- 4 ----------------------------------------------------------------------
void criterion4(Report& r) {
  const auto pair = nonoscillatory_states(params(1.5, 100));
  r.require(std::abs(pair.phi_minus + pair.phi_plus - kPi) < 1e-12,
            fmt("N0 = 100, gamma = 1.5: phi- = %.6f, phi+ = %.6f, sum - pi = %.1e", pair.phi_minus, pair.phi_plus,
                pair.phi_minus + pair.phi_plus - kPi));

  auto exists = [](double gamma) {
    try {
      (void)nonoscillatory_states(params(gamma, 100));
      return true;
    } catch (const CoalescedError&) {
      return false;
    }
  };
  bool all_before = true;
  for (double gm : grid(0.05, 0.05, 38)) all_before = all_before && exists(gm);
  double lo = 1.5, hi = critical_gamma(100) - 1e-12;
  const bool bracket = exists(lo) && !exists(hi);
  for (int k = 0; k < 60 && bracket; ++k) (exists(0.5 * (lo + hi)) ? lo : hi) = 0.5 * (lo + hi);
  r.require(all_before && bracket && lo < 2.0 && lo < critical_gamma(100),
            fmt("branches exist on (0, 1.9]; coalescence at gamma = %.6f < 2J and < critical %.6f", lo,
                critical_gamma(100)));

  double worst = 0.0;
  for (double gm : {0.5, 1.0, 1.5, 1.9}) {
    const auto big = nonoscillatory_states(params(gm, 1000000));
    const double a = std::acos(gm / 2.0);
    worst = std::max({worst, std::abs(big.phi_minus - (kPi / 2 - a)), std::abs(big.phi_plus - (kPi / 2 + a)),
                      std::abs(big.theta - kPi / 2)});
  }
  r.require(worst < kC4Limit, fmt("N0 = 1e6: max deviation from the infinite-N0 angles %.2e (limit %.0e)", worst, kC4Limit));
}

// --- 5 ----------------------------------------------------------------------
void criterion5(Report& r) {
  const int N0 = 100;
  const auto p = params(1.5, N0);
  const auto pair = nonoscillatory_states(p);
  const double th = pair.theta, ph = pair.phi_minus;
  const FirstMoments m0{N0 * std::sin(th) * std::cos(ph), N0 * std::sin(th) * std::sin(ph), N0 * std::cos(th), double(N0)};
  const auto sol = oscillatory_solution(m0, p);
  const double a3 = steady_alpha(p).a3;
  double dev = 0.0;
  for (int k = 0; k < 100; ++k) dev = std::max(dev, std::abs(sol.evaluate(0.5 * k).sz - a3));
  r.require(std::abs(sol.kappa().kappa3) < kC5Kappa3, fmt("kappa3 = %.2e", sol.kappa().kappa3));
  r.require(dev < kC5Sz, fmt("max |s_z(t) - alpha3| over 100 times in [0, 49.5] = %.2e", dev));
}

// --- 6 ----------------------------------------------------------------------
void criterion6(Report& r) {
  const int N0 = 100;
  const std::vector<double> gs{0.1, 0.5, 1.0};
  std::vector<double> gammas;
  for (int k = 1; k <= 105; ++k) gammas.push_back(k / 50.0);
  BranchOptions opt;
  opt.gamma_start = gammas.front();

  std::vector<double> crit;
  std::vector<const BranchPoint*> at_one;
  std::vector<Branch> branches;
  branches.reserve(gs.size());
  for (double g : gs) {
    branches.push_back(trace_branch(1.0, N0, BbrMode::fixed_u(g / (N0 - 1)), gammas, opt));
    const Branch& br = branches.back();
    crit.push_back(br.boundary.value_or(std::nan("")));
    const BranchPoint* hit = nullptr;
    for (const auto& pt : br.points) {
      if (pt.gamma == 1.0 && pt.exists) hit = &pt;
    }
    at_one.push_back(hit);
    r.note(fmt("g = %.1f: gamma_crit = %.4f", g, crit.back()));
  }
  const bool decreasing = crit[0] > crit[1] && crit[1] > crit[2];
  r.require(decreasing, "gamma_crit strictly decreasing in g");

  const double sy0 = noninteracting_steady_moments(params(1.0, N0)).s[1];
  bool all_exist = true;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    if (!at_one[k]) {
      all_exist = false;
      r.note(fmt("g = %.1f: no steady state at gamma = 1.0 (branch ends at %.4f)", gs[k], crit[k]));
    } else {
      r.note(fmt("g = %.1f, gamma = 1.0: s_x = %.4f, s_y = %.4f (U = 0: %.4f)", gs[k], at_one[k]->state.s[0],
                 at_one[k]->state.s[1], sy0));
    }
  }
  r.require(all_exist, "steady state exists at gamma = 1.0 for every g");
  if (!all_exist) return;
  bool sx_ok = true, sy_ok = true;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    const auto& s = at_one[k]->state.s;
    sx_ok = sx_ok && s[0] <= 0.0 && (k == 0 || std::abs(s[0]) > std::abs(at_one[k - 1]->state.s[0]));
    sy_ok = sy_ok && std::abs(s[1] - sy0) <= kC6Sy * std::abs(sy0);
  }
  r.require(sx_ok, "s_x <= 0 with |s_x| increasing in g");
  r.require(sy_ok, "s_y within 10% of the U = 0 value");
}

// --- 7 ----------------------------------------------------------------------
void criterion7(Report& r) {
  const int N0 = 100;
  BranchOptions opt;
  opt.gamma_start = 0.05;
  {
    const auto br = trace_branch(1.0, N0, BbrMode::constant_g(0.5), grid(0.05, 0.005, 411), opt);
    double best = 0.0, at = 0.0;
    for (const auto& pt : br.points) {
      if (pt.exists && pt.purity > best) best = pt.purity, at = pt.gamma;
    }
    r.require(best > kC7Max, fmt("(a) g = 0.5: max purity %.4f at gamma = %.3f, branch ends at %.4f", best, at,
                                 br.boundary.value_or(std::nan(""))));
  }

  bool all_pure = true;
  int existing = 0;
  for (double g : {0.0, 0.25, 0.5, 0.75}) {
    std::vector<double> path = grid(0.05, 0.05, 29);  // approach to 1.45
    for (int k = 0; k < 5; ++k) path.push_back(1.5 + 0.125 * k);
    const auto br = trace_branch(1.0, N0, BbrMode::constant_g(g), path, opt);
    std::string row = fmt("(b) g = %.2f:", g);
    for (const auto& pt : br.points) {
      if (pt.gamma < 1.5 - 1e-12) continue;
      if (!pt.exists) {
        row += fmt("  %.3f:none", pt.gamma);
        continue;
      }
      ++existing;
      all_pure = all_pure && pt.purity > kC7Grid;
      row += fmt("  %.3f:P=%.3f", pt.gamma, pt.purity);
    }
    r.note(row);
  }
  r.require(all_pure, fmt("(b) every existing steady state on the 5x4 grid has P > %.1f (%d existing)", kC7Grid, existing));
}

// --- 8 ----------------------------------------------------------------------
void criterion8(Report& r) {
  const auto p = params(0.5, 5);
  const TwoModeBasis b(kC8Cutoff);
  const auto ss = solve_steady(p, b);
  PropagationConfig prop;
  prop.sample_interval = 0.5;
  const auto rep = verify_attractor(ss.rho, p, b, 0.5, 40.0, prop);
  const double target = p.gamma_minus();
  bool ok = true;
  for (const auto& run : rep.runs) {
    const double rel = std::abs(run.fitted_rate - target) / target;
    ok = ok && rel <= kC8Rate && run.distances.back() < run.distances.front();
    r.note(fmt("%-8s D: %.3e -> %.3e, fitted rate %.5f (%.1f%% off)", run.label.c_str(), run.distances.front(),
               run.distances.back(), run.fitted_rate, 100 * rel));
  }
  r.require(ok, fmt("fitted rates within %.0f%% of gamma_minus = %.5f (mean %.5f)", 100 * kC8Rate, target, rep.mean_rate));
}

// --- 9 ----------------------------------------------------------------------
Eigen::VectorXcd taylor_step(const Liouvillian& L, const Eigen::VectorXcd& v, double h) {
  Eigen::VectorXcd term = v, out = v;
  for (int k = 1; k < 40 && term.cwiseAbs().maxCoeff() > 1e-18; ++k) {
    term = (h / k) * L.apply(term);
    out += term;
  }
  return out;
}

void criterion9(Report& r) {
  const int cutoff = 14;
  const TwoModeBasis b(cutoff);
  const MomentEvaluator moments(b);
  bool exact_ok = true, free_ok = true;
  double worst_exact = 0.0, worst_free = 0.0;
  for (double g : {0.0, 0.5}) {
    for (int N0 : {2, 4, 6}) {
      const auto p = params(0.7, N0, SystemParams::interaction_from_g(g, N0));
      const Liouvillian L = build_liouvillian(p, b, Sector::NumberDiagonal);
      for (auto [th, ph] : {std::pair{kPi / 2, kPi / 2}, std::pair{1.0, 0.3}, std::pair{2.2, -1.7}}) {
        const Eigen::MatrixXcd rho = DensityMatrix::pure(coherent_state(b, N0, th, ph)).matrix();
        const Eigen::VectorXcd v = L.vectorize(rho);
        const auto plus = MomentState::from_bloch(moments(L.unvectorize(taylor_step(L, v, kC9Step)))).pack();
        const auto minus = MomentState::from_bloch(moments(L.unvectorize(taylor_step(L, v, -kC9Step)))).pack();
        const MomentState::Vector fd = (plus - minus) / (2 * kC9Step);
        const auto state = MomentState::from_bloch(moments(rho));

        const double exact = (moment_rhs(state, p, p.U, hierarchy::exact_third_moments(rho, b)).pack() - fd).cwiseAbs().maxCoeff();
        worst_exact = std::max(worst_exact, exact);
        exact_ok = exact_ok && exact < kC9Rhs;

        const double closed = (moment_rhs(state, p, BbrMode::fixed_u(p.U)).pack() - fd).cwiseAbs().maxCoeff();
        double cumulant = 0.0;
        for (const cplx& c : hierarchy::third_cumulants(rho, b)) cumulant = std::max(cumulant, std::abs(c));
        if (g == 0.0) {
          worst_free = std::max(worst_free, closed);
          free_ok = free_ok && closed < kC9Rhs;
        } else {
          r.note(fmt("g = 0.5, N0 = %d, (%.2f, %.2f): closure deviation %.3e, max |third cumulant| %.3e", N0, th, ph,
                     closed, cumulant));
        }
      }
    }
  }
  r.require(free_ok, fmt("g = 0: all 14 components of the closed equations within %.0e (worst %.2e)", kC9Rhs, worst_free));
  r.require(exact_ok, fmt("with exact third moments, g in {0, 0.5}: within %.0e (worst %.2e)", kC9Rhs, worst_exact));
}

// --- 10 ---------------------------------------------------------------------
void criterion10(Report& r) {
  double worst_velocity = 0.0;
  for (double gamma : {0.5, 1.0, 1.5}) {
    const auto st = pt_stationary_states(1.0, gamma);
    for (double g : {0.0, 0.5}) {
      for (const auto& a : {st.ground, st.excited}) {
        worst_velocity = std::max(worst_velocity, angle_velocity(state_from_angles(a), 1.0, g, gamma).cwiseAbs().maxCoeff());
      }
    }
  }
  r.require(worst_velocity < kC10Velocity, fmt("stationary angle velocities: max %.2e", worst_velocity));

  const int N0 = 10000;
  const double g = 0.5;
  OdeOptions opt;
  opt.abs_tol = 1e-10;
  opt.rel_tol = 1e-10;
  double worst = 0.0;
  for (double gamma : {0.5, 1.0, 1.5}) {
    const auto st = pt_stationary_states(1.0, gamma);
    const auto bbr = integrate(pure_state_moments(st.ground.theta, st.ground.phi, N0), 10.0, params(gamma, N0),
                               BbrMode::fixed_u(g / (N0 - 1)), opt, 0.1);
    const auto gpe = integrate_gpe(state_from_angles(st.ground), 10.0, 1.0, g, gamma, opt, 0.1);
    const std::size_t n = std::min(bbr.samples.size(), gpe.samples.size());
    double dist = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Vector3d red = bbr.samples[k].state.s / bbr.samples[k].state.n;
      dist = std::max(dist, (red - gpe.samples[k].bloch).norm());
    }
    worst = std::max(worst, dist);
    r.note(fmt("gamma = %.1f, g = %.1f: max reduced-Bloch distance %.2e over %zu samples", gamma, g, dist, n));
  }
  r.require(worst < kC10Distance, fmt("BBR at N0 = 1e4 follows the GPE ground state for t <= 10 (max %.2e)", worst));
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Report&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));

  const std::vector<Criterion> criteria{
      {1, "steady reduced moments at U = 0", criterion1},
      {2, "steady distributions at N0 = 5, g = 0.5", criterion2},
      {3, "master equation vs U = 0 closed form", criterion3},
      {4, "non-oscillatory branches", criterion4},
      {5, "non-oscillation of the (theta, phi-) state", criterion5},
      {6, "fixed-U steady branch", criterion6},
      {7, "constant-g pure steady state", criterion7},
      {8, "steady state is an attractor", criterion8},
      {9, "moment equations vs master equation", criterion9},
      {10, "mean-field consistency", criterion10},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Report rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(rep);
    } catch (const std::exception& e) {
      rep.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownFailures.count(c.id) != 0;
    const char* tag = rep.pass ? (known ? " (known failure now passes)" : "") : (known ? " (known failure)" : "");
    std::printf("criterion %2d: %s  %s [%.1f s]%s\n", c.id, rep.pass ? "PASS" : "FAIL", c.title, secs, tag);
    for (const auto& line : rep.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    if (rep.pass == known) ++unexpected;
  }
  std::printf("%d unexpected result(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
