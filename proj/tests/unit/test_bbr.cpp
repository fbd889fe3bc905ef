#include "doctest.h"
#include "support.hpp"

#include "ptbec/bbr.hpp"
#include "ptbec/closedform.hpp"
#include "ptbec/errors.hpp"
#include "ptbec/steady.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace ptbec;
using Eigen::MatrixXcd;

namespace {

SystemParams params(double gamma, int N0, double U = 0.0) {
  SystemParams p;
  p.U = U;
  p.gamma = gamma;
  p.N0 = N0;
  return p;
}

/// Time derivative of the packed BBR state straight from the dense master
/// equation: d<A>, and dDelta_jk = d<A_j A_k + A_k A_j> - 2 d(<A_j><A_k>).
MomentState::Vector dense_moment_derivative(const MatrixXcd& rho, const SystemParams& p, int cutoff) {
  const TwoModeBasis b(cutoff);
  const auto ops = bloch_operators(b);
  const MatrixXcd drho = testsupport::dense_master(rho, p, cutoff);
  std::array<MatrixXcd, 4> A;
  Eigen::Vector4d m, dm;
  for (int k = 0; k < 4; ++k) {
    A[static_cast<std::size_t>(k)] = MatrixXcd(ops[k].matrix());
    m[k] = (rho * A[static_cast<std::size_t>(k)]).trace().real();
    dm[k] = (drho * A[static_cast<std::size_t>(k)]).trace().real();
  }
  MomentState d;
  d.s = 2.0 * dm.head<3>();
  d.n = dm[3];
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) {
      const MatrixXcd sym = A[static_cast<std::size_t>(j)] * A[static_cast<std::size_t>(k)] + A[static_cast<std::size_t>(k)] * A[static_cast<std::size_t>(j)];
      d.delta(j, k) = (drho * sym).trace().real() - 2 * (dm[j] * m[k] + m[j] * dm[k]);
    }
  }
  return d.pack();
}

}  // namespace

TEST_CASE("pack and unpack") {
  MomentState s;
  s.s = {1, 2, 3};
  s.n = 4;
  s.delta << 5, 6, 7, 8, 6, 9, 10, 11, 7, 10, 12, 13, 8, 11, 13, 14;
  const auto v = s.pack();
  for (int k = 0; k < MomentState::kSize; ++k) CHECK(v[k] == k + 1);
  const auto u = MomentState::unpack(v);
  CHECK(u.delta == s.delta);
  CHECK(u.s == s.s);
  CHECK(u.number_uncertainty() == doctest::Approx(std::sqrt(7.0)));
}

TEST_CASE("pure-state moments match the Fock-space binomial state") {
  const int N0 = 5;
  const TwoModeBasis b(10);
  for (auto [th, ph] : {std::pair{M_PI / 2, M_PI / 2}, std::pair{0.4, -2.0}, std::pair{2.9, 1.0}}) {
    const auto ref = MomentState::from_bloch(bloch_moments(DensityMatrix::pure(coherent_state(b, N0, th, ph)), b));
    const auto m = pure_state_moments(th, ph, N0);
    CHECK((m.pack() - ref.pack()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("moment_rhs with exact third moments equals the master-equation derivative") {
  const int cutoff = 9;
  const TwoModeBasis b(cutoff);
  std::mt19937 rng(4);
  for (const auto& p : {params(0.5, 5, 0.125), params(1.2, 3, -0.3), params(0.0, 2, 0.6)}) {
    const MatrixXcd rho = testsupport::random_density(cutoff, 4, rng);
    const auto state = MomentState::from_bloch(bloch_moments(DensityMatrix(rho), b));
    const auto rhs = moment_rhs(state, p, p.U, hierarchy::exact_third_moments(rho, b));
    CHECK((rhs.pack() - dense_moment_derivative(rho, p, cutoff)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("closed equations are exact without interaction") {
  const int cutoff = 9;
  const TwoModeBasis b(cutoff);
  std::mt19937 rng(6);
  const auto p = params(0.8, 4);
  const MatrixXcd rho = testsupport::random_density(cutoff, 4, rng);
  const auto state = MomentState::from_bloch(bloch_moments(DensityMatrix(rho), b));
  const auto rhs = moment_rhs(state, p, BbrMode::fixed_u(0.0));
  CHECK((rhs.pack() - dense_moment_derivative(rho, p, cutoff)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("interaction modes") {
  CHECK(BbrMode::fixed_u(0.3).interaction(50.0) == 0.3);
  CHECK(BbrMode::constant_g(0.5).interaction(11.0) == doctest::Approx(0.05));
  CHECK_THROWS_AS(BbrMode::constant_g(0.5).interaction(1.0), SingularityError);
  CHECK_THROWS_AS(BbrMode::constant_g(0.5).interaction(0.5), SingularityError);
  CHECK(BbrMode::fixed_u(0.01).macroscopic_g(101) == doctest::Approx(1.0));
  CHECK(BbrMode::constant_g(0.7).macroscopic_g(101) == 0.7);
}

TEST_CASE("U = 0 steady state equals the closed form") {
  for (const auto& p : {params(1.5, 100), params(0.5, 5), params(1.9, 1000)}) {
    const auto ref = steady_alpha(p);
    const auto lin = noninteracting_steady_moments(p);
    const double scale = std::max(1.0, ref.a4);
    CHECK(std::abs(lin.s[0] - ref.a1) < 1e-8 * scale);
    CHECK(std::abs(lin.s[1] - ref.a2) < 1e-8 * scale);
    CHECK(std::abs(lin.s[2] - ref.a3) < 1e-8 * scale);
    CHECK(std::abs(lin.n - ref.a4) < 1e-8 * scale);
    CHECK(moment_rhs(lin, p, BbrMode::fixed_u(0.0)).pack().cwiseAbs().maxCoeff() < 1e-9 * scale);

    auto guess = lin;
    guess.s *= 1.05;
    guess.n *= 0.97;
    const auto root = steady_root_search(p, BbrMode::fixed_u(0.0), guess);
    REQUIRE(root.physical());
    CHECK((root.state.pack() - lin.pack()).cwiseAbs().maxCoeff() < 1e-8 * scale * scale);
    CHECK(root.residual <= root.threshold);
    CHECK(is_physical(root.state));
  }
}

TEST_CASE("U = 0 integration follows the closed form") {
  const auto p = params(1.2, 20);
  const auto init = pure_state_moments(1.0, 0.3, 20);
  OdeOptions opt;
  opt.abs_tol = opt.rel_tol = 1e-12;
  const auto traj = integrate(init, 10.0, p, BbrMode::fixed_u(0.0), opt, 0.5);
  REQUIRE(traj.samples.size() == 21);
  const auto sol = oscillatory_solution(init.first(), p);
  for (const auto& s : traj.samples) {
    const auto ref = sol.evaluate(s.t);
    CHECK(std::abs(s.state.s[0] - ref.sx) < 1e-8);
    CHECK(std::abs(s.state.s[1] - ref.sy) < 1e-8);
    CHECK(std::abs(s.state.s[2] - ref.sz) < 1e-8);
    CHECK(std::abs(s.state.n - ref.n) < 1e-8);
  }
}

TEST_CASE("particle number is conserved without gain and loss") {
  const auto init = pure_state_moments(1.3, 0.2, 50);
  OdeOptions opt;
  const auto traj = integrate(init, 5.0, params(0.0, 50), BbrMode::fixed_u(0.02), opt, 1.0);
  for (const auto& s : traj.samples) CHECK(std::abs(s.state.n - 50.0) < 1e-9);
}

TEST_CASE("constant-g integration stops at the singularity") {
  MomentState s = pure_state_moments(M_PI / 2, 0.0, 2);
  s.n = 1.0;
  CHECK_THROWS_AS(moment_rhs(s, params(0.5, 2), BbrMode::constant_g(0.5)), SingularityError);
}

TEST_CASE("physicality check") {
  auto s = pure_state_moments(0.5, 0.5, 10);
  CHECK(is_physical(s));
  s.s *= 1.01;
  CHECK_FALSE(is_physical(s));
  s = pure_state_moments(0.5, 0.5, 10);
  s.delta(1, 1) = -1e-3;
  CHECK_FALSE(is_physical(s));
}

TEST_CASE("U = 0 branch ends at the divergence") {
  std::vector<double> gammas;
  for (int k = 1; k <= 21; ++k) gammas.push_back(0.1 * k);
  const auto br = trace_branch(1.0, 100, BbrMode::fixed_u(0.0), gammas);
  REQUIRE(br.boundary.has_value());
  CHECK(std::abs(*br.boundary - divergence_gamma(100)) < 1e-3);
  for (const auto& pt : br.points) {
    if (!pt.exists) continue;
    CHECK(pt.purity == doctest::Approx(steady_purity(params(pt.gamma, 100)).exact).epsilon(1e-6));
  }
  std::ostringstream os;
  write_sweep_csv(os, br.points);
  CHECK(os.str().rfind("gamma,g,exists,s_x,s_y,s_z,n,P,Delta_n\n", 0) == 0);
}

TEST_CASE("interacting steady state is close to the master-equation result at N0 = 5") {
  // The cutoff-24 master-equation state is itself not fully cutoff-converged;
  // the closure and the truncation together account for a few percent.
  const int N0 = 5;
  const double g = 0.5;
  auto p = params(0.5, N0, SystemParams::interaction_from_g(g, N0));
  const auto bbr = steady_state_by_continuation(p, BbrMode::fixed_u(p.U));
  REQUIRE(bbr.physical());
  SteadySolveConfig cfg;
  cfg.truncation_ceiling = 1e-2;
  const auto ss = solve_steady(p, TwoModeBasis(24), cfg);
  CHECK(bbr.state.n == doctest::Approx(ss.moments.n).epsilon(0.07));
  CHECK(bbr.state.s[1] == doctest::Approx(ss.moments.sy).epsilon(0.07));
  CHECK(bbr.state.s[0] < 0.0);
  CHECK(ss.moments.sx < 0.0);
}
