#include "doctest.h"
#include "support.hpp"

#include "ptbec/hierarchy.hpp"

#include <cmath>
#include <random>

using namespace ptbec;
using namespace ptbec::hierarchy;
using testsupport::dense_annihilator;
using Eigen::MatrixXcd;

namespace {

constexpr int kCutoff = 7;
constexpr int kOcc = 3;  // support well below the cutoff: products of three E's stay exact

std::array<MatrixXcd, 4> dense_E() {
  std::array<MatrixXcd, 4> E;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) E[static_cast<std::size_t>(2 * i + j)] = dense_annihilator(kCutoff, i + 1).adjoint() * dense_annihilator(kCutoff, j + 1);
  }
  return E;
}

cplx tr(const MatrixXcd& rho, const MatrixXcd& op) { return (rho * op).trace(); }

SystemParams params(double U, double gamma, int N0) {
  SystemParams p;
  p.U = U;
  p.gamma = gamma;
  p.N0 = N0;
  return p;
}

}  // namespace

TEST_CASE("exact E moments match dense traces") {
  const TwoModeBasis b(kCutoff);
  const auto E = dense_E();
  std::mt19937 rng(3);
  const MatrixXcd rho = testsupport::random_density(kCutoff, kOcc, rng);
  const auto e = exact_moments(rho, b);
  const auto T = exact_third_moments(rho, b);
  for (int p = 0; p < 4; ++p) {
    CHECK(std::abs(e.m[static_cast<std::size_t>(p)] - tr(rho, E[static_cast<std::size_t>(p)])) < 1e-12);
    for (int q = 0; q < 4; ++q) {
      CHECK(std::abs(e.second(p, q) - tr(rho, E[static_cast<std::size_t>(p)] * E[static_cast<std::size_t>(q)])) < 1e-12);
      for (int r = 0; r < 4; ++r) {
        const MatrixXcd op = E[static_cast<std::size_t>(p)] * E[static_cast<std::size_t>(q)] * E[static_cast<std::size_t>(r)];
        CHECK(std::abs(T[static_cast<std::size_t>(16 * p + 4 * q + r)] - tr(rho, op)) < 1e-11);
      }
    }
  }
}

TEST_CASE("symbolic generator with exact third moments equals the master equation") {
  const TwoModeBasis b(kCutoff);
  const auto E = dense_E();
  std::mt19937 rng(17);
  for (const auto& p : {params(0.0, 0.5, 5), params(0.7, 1.3, 3), params(-0.4, 0.2, 40)}) {
    const MatrixXcd rho = testsupport::random_density(kCutoff, kOcc, rng);
    const MatrixXcd drho = testsupport::dense_master(rho, p, kCutoff);
    const auto r = p.rates();
    const GeneratorRates rates{p.J, p.U, r.loss, r.gain};
    const auto de = derivative(exact_moments(rho, b), exact_third_moments(rho, b), rates);
    for (int a = 0; a < 4; ++a) {
      CHECK(std::abs(de.m[static_cast<std::size_t>(a)] - tr(drho, E[static_cast<std::size_t>(a)])) < 1e-10);
      for (int c = 0; c < 4; ++c) {
        const cplx ref = tr(drho, E[static_cast<std::size_t>(a)] * E[static_cast<std::size_t>(c)]);
        CHECK(std::abs(de.second(a, c) - ref) < 1e-10);
      }
    }
  }
}

TEST_CASE("bloch conversion round trip") {
  const TwoModeBasis b(kCutoff);
  std::mt19937 rng(8);
  const MatrixXcd rho = testsupport::random_density(kCutoff, kOcc, rng);
  const auto m = bloch_moments(DensityMatrix(rho), b);
  const Eigen::Vector4d means(m.sx / 2, m.sy / 2, m.sz / 2, m.n);
  const auto e = from_bloch(means, m.delta);
  const auto ref = exact_moments(rho, b);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(e.m[k] - ref.m[k]) < 1e-12);
  for (std::size_t k = 0; k < 16; ++k) CHECK(std::abs(e.S[k] - ref.S[k]) < 1e-12);

  // derivative conversion: pushing the exact E derivative through must give
  // the dense derivatives of <A> and Delta.
  const auto p = params(0.3, 0.9, 4);
  const MatrixXcd drho = testsupport::dense_master(rho, p, kCutoff);
  const auto r = p.rates();
  const auto de = derivative(ref, exact_third_moments(rho, b), {p.J, p.U, r.loss, r.gain});
  Eigen::Vector4d dmeans;
  Eigen::Matrix4d ddelta;
  to_bloch_derivative(ref, de, dmeans, ddelta);
  const auto ops = bloch_operators(b);
  std::array<MatrixXcd, 4> A;
  for (int k = 0; k < 4; ++k) A[static_cast<std::size_t>(k)] = MatrixXcd(ops[k].matrix());
  for (int j = 0; j < 4; ++j) {
    const double mj = tr(rho, A[static_cast<std::size_t>(j)]).real(), dj = tr(drho, A[static_cast<std::size_t>(j)]).real();
    CHECK(std::abs(dmeans[j] - dj) < 1e-10);
    for (int k = 0; k < 4; ++k) {
      const double mk = tr(rho, A[static_cast<std::size_t>(k)]).real(), dk = tr(drho, A[static_cast<std::size_t>(k)]).real();
      const MatrixXcd sym = A[static_cast<std::size_t>(j)] * A[static_cast<std::size_t>(k)] + A[static_cast<std::size_t>(k)] * A[static_cast<std::size_t>(j)];
      const double ref_dd = tr(drho, sym).real() - 2 * (dj * mk + mj * dk);
      CHECK(std::abs(ddelta(j, k) - ref_dd) < 1e-10);
    }
  }
}

TEST_CASE("factorization is exact on its own defining identity") {
  const TwoModeBasis b(kCutoff);
  std::mt19937 rng(21);
  const MatrixXcd rho = testsupport::random_density(kCutoff, kOcc, rng);
  const auto e = exact_moments(rho, b);
  const auto F = factorized_third_moments(e);
  const auto C = third_cumulants(rho, b);
  const auto T = exact_third_moments(rho, b);
  for (int a = 0; a < 4; ++a) {
    for (int c = 0; c < 4; ++c) {
      for (int d = 0; d < 4; ++d) {
        const std::size_t k = static_cast<std::size_t>(16 * a + 4 * c + d);
        const cplx ref = e.second(a, c) * e.m[static_cast<std::size_t>(d)] + e.second(a, d) * e.m[static_cast<std::size_t>(c)] +
                         e.second(c, d) * e.m[static_cast<std::size_t>(a)] -
                         2.0 * e.m[static_cast<std::size_t>(a)] * e.m[static_cast<std::size_t>(c)] * e.m[static_cast<std::size_t>(d)];
        CHECK(std::abs(F[k] - ref) < 1e-12);
        CHECK(std::abs(C[k] - (T[k] - F[k])) < 1e-12);
      }
    }
  }
}

TEST_CASE("generator polynomials have bounded degree") {
  for (Part part : {Part::Hopping, Part::Interaction, Part::Loss, Part::Gain}) {
    for (int p = 0; p < 4; ++p) {
      for (const auto& t : first_order_generator(part, p)) CHECK(t.len <= 2);
      for (int q = 0; q < 4; ++q) {
        for (const auto& t : second_order_generator(part, p, q)) CHECK(t.len <= 3);
      }
    }
  }
}
