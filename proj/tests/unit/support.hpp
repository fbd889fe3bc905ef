#pragma once

// Dense reference constructions used as oracles. They avoid the library's
// sparse operator code paths on purpose.

#include "ptbec/fock.hpp"
#include "ptbec/params.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

namespace testsupport {

using ptbec::cplx;
using Eigen::MatrixXcd;

inline int flat(int cutoff, int n1, int n2) { return n1 * (cutoff + 1) + n2; }

/// Annihilation operator on site 1 or 2, written out element by element.
inline MatrixXcd dense_annihilator(int cutoff, int site) {
  const int L = cutoff + 1;
  MatrixXcd a = MatrixXcd::Zero(L * L, L * L);
  for (int n1 = 0; n1 <= cutoff; ++n1) {
    for (int n2 = 0; n2 <= cutoff; ++n2) {
      if (site == 1 && n1 > 0) a(flat(cutoff, n1 - 1, n2), flat(cutoff, n1, n2)) = std::sqrt(double(n1));
      if (site == 2 && n2 > 0) a(flat(cutoff, n1, n2 - 1), flat(cutoff, n1, n2)) = std::sqrt(double(n2));
    }
  }
  return a;
}

inline MatrixXcd dense_hamiltonian(int cutoff, double J, double U) {
  const MatrixXcd a1 = dense_annihilator(cutoff, 1), a2 = dense_annihilator(cutoff, 2);
  const MatrixXcd c1 = a1.adjoint(), c2 = a2.adjoint();
  return -J * (c1 * a2 + c2 * a1) + 0.5 * U * (c1 * c1 * a1 * a1 + c2 * c2 * a2 * a2);
}

/// Master-equation right-hand side from dense matrices.
inline MatrixXcd dense_master(const MatrixXcd& rho, const ptbec::SystemParams& p, int cutoff) {
  const cplx I(0.0, 1.0);
  const MatrixXcd H = dense_hamiltonian(cutoff, p.J, p.U);
  const MatrixXcd a1 = dense_annihilator(cutoff, 1), a2 = dense_annihilator(cutoff, 2);
  const MatrixXcd c2 = a2.adjoint();
  const double loss = p.gamma, gain = p.gamma * p.N0 / (p.N0 + 2.0);
  MatrixXcd out = -I * (H * rho - rho * H);
  const MatrixXcd n1 = a1.adjoint() * a1, m2 = a2 * c2;
  out += loss * (a1 * rho * a1.adjoint() - 0.5 * (n1 * rho + rho * n1));
  out += gain * (c2 * rho * a2 - 0.5 * (m2 * rho + rho * m2));
  return out;
}

/// (c1 a1^dag + c2 a2^dag)^N |0,0> / sqrt(N!) by repeated application.
inline Eigen::VectorXcd dense_condensate(int cutoff, int N, double theta, double phi) {
  const cplx c1 = std::polar(std::sin(theta / 2.0), phi);
  const double c2 = std::cos(theta / 2.0);
  const MatrixXcd create = c1 * dense_annihilator(cutoff, 1).adjoint() + c2 * dense_annihilator(cutoff, 2).adjoint();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero((cutoff + 1) * (cutoff + 1));
  psi(0) = 1.0;
  for (int k = 1; k <= N; ++k) psi = create * psi / std::sqrt(double(k));
  return psi;
}

/// Random density matrix supported on states with n1, n2 <= max_occ.
/// With number_diagonal, coherences between different totals are removed.
inline MatrixXcd random_density(int cutoff, int max_occ, std::mt19937& rng, bool number_diagonal = false) {
  std::normal_distribution<double> gauss;
  const int L = cutoff + 1;
  MatrixXcd G = MatrixXcd::Zero(L * L, L * L);
  for (int n1 = 0; n1 <= max_occ; ++n1) {
    for (int n2 = 0; n2 <= max_occ; ++n2) {
      for (int c = 0; c < L * L; ++c) G(flat(cutoff, n1, n2), c) = cplx(gauss(rng), gauss(rng));
    }
  }
  MatrixXcd rho = G * G.adjoint();
  if (number_diagonal) {
    for (int r = 0; r < L * L; ++r) {
      for (int c = 0; c < L * L; ++c) {
        if (r / L + r % L != c / L + c % L) rho(r, c) = 0.0;
      }
    }
  }
  return rho / rho.trace().real();
}

}  // namespace testsupport
