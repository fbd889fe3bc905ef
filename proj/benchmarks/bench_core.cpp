#include "ptbec/bbr.hpp"
#include "ptbec/liouville.hpp"
#include "ptbec/steady.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

namespace {

ptbec::SystemParams params(double gamma, int N0, double g) {
  ptbec::SystemParams p;
  p.gamma = gamma;
  p.N0 = N0;
  p.U = ptbec::SystemParams::interaction_from_g(g, N0);
  return p;
}

void BM_LiouvillianAssembly(benchmark::State& state) {
  const ptbec::TwoModeBasis basis(static_cast<int>(state.range(0)));
  const auto p = params(0.5, 5, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(ptbec::build_liouvillian(p, basis, ptbec::Sector::NumberDiagonal));
}
BENCHMARK(BM_LiouvillianAssembly)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_LiouvillianApply(benchmark::State& state) {
  const ptbec::TwoModeBasis basis(static_cast<int>(state.range(0)));
  const auto L = ptbec::build_liouvillian(params(0.5, 5, 0.5), basis, ptbec::Sector::NumberDiagonal);
  const Eigen::VectorXcd v = L.vectorize(ptbec::DensityMatrix::basis_state(basis, 2, 3).matrix());
  for (auto _ : state) benchmark::DoNotOptimize(L.apply(v));
  state.SetItemsProcessed(state.iterations() * L.matrix().nonZeros());
}
BENCHMARK(BM_LiouvillianApply)->Arg(12)->Arg(24)->Arg(40);

void BM_BbrRhs(benchmark::State& state) {
  const auto p = params(1.0, 100, 0.5);
  const auto mode = ptbec::BbrMode::fixed_u(p.U);
  const auto s = ptbec::pure_state_moments(std::numbers::pi / 2, 0.8, 100);
  for (auto _ : state) benchmark::DoNotOptimize(ptbec::moment_rhs(s, p, mode));
}
BENCHMARK(BM_BbrRhs);

void BM_SteadySolve(benchmark::State& state) {
  const ptbec::TwoModeBasis basis(static_cast<int>(state.range(0)));
  const auto p = params(0.5, 2, 0.0);
  ptbec::SteadySolveConfig cfg;
  cfg.truncation_ceiling = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(ptbec::solve_steady(p, basis, cfg));
}
BENCHMARK(BM_SteadySolve)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
