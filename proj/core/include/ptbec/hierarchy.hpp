#pragma once

// Moment hierarchy of the master equation in the basis E_ij = a_i^dag a_j.
//
// The adjoint generator G(X) = i[H, X] + sum_c rate (c^dag X c - {c^dag c, X}/2)
// is applied symbolically to E_p and to ordered products E_p E_q; the result
// is a polynomial in the E's of degree <= 3 whose expectation value gives the
// exact time derivative of <E_p> and <E_p E_q> once the third moments
// <E_a E_b E_c> are supplied. Those come either from a density matrix
// (exact) or from the factorization
//   <ABC> ~ <AB><C> + <AC><B> + <BC><A> - 2 <A><B><C>.
//
// Index p = 2 (i - 1) + (j - 1): E11 -> 0, E12 -> 1, E21 -> 2, E22 -> 3.

#include "ptbec/fock.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace ptbec::hierarchy {

constexpr int kE11 = 0, kE12 = 1, kE21 = 2, kE22 = 3;

/// First and ordered second moments: m[p] = <E_p>, S[4 p + q] = <E_p E_q>.
struct EMoments {
  std::array<cplx, 4> m{};
  std::array<cplx, 16> S{};

  cplx second(int p, int q) const { return S[static_cast<std::size_t>(4 * p + q)]; }
};

/// T[16 a + 4 b + c] = <E_a E_b E_c>.
using ThirdMoments = std::array<cplx, 64>;

/// Coefficients multiplying the four parts of the generator.
struct GeneratorRates {
  double J = 0.0;     ///< hopping
  double U = 0.0;     ///< on-site interaction
  double loss = 0.0;  ///< rate of a1
  double gain = 0.0;  ///< rate of a2^dag
};

/// A monomial coefficient * E_w[0] ... E_w[len-1] (len 0 is the identity).
struct Term {
  cplx coeff;
  std::uint8_t len = 0;
  std::array<std::uint8_t, 3> word{};
};
using Polynomial = std::vector<Term>;

enum class Part { Hopping, Interaction, Loss, Gain };

/// G restricted to one part, per unit coefficient, applied to E_p.
const Polynomial& first_order_generator(Part part, int p);
/// G restricted to one part, per unit coefficient, applied to E_p E_q.
const Polynomial& second_order_generator(Part part, int p, int q);

/// Bloch quantities <A_a> and Delta_ab (A = L_x, L_y, L_z, n) -> E moments,
/// using <A_a A_b> = Delta_ab / 2 + <A_a><A_b> + <[A_a, A_b]> / 2.
EMoments from_bloch(const Eigen::Vector4d& means, const Eigen::Matrix4d& delta);

/// Time derivatives of <A_a> and Delta_ab from derivatives of the E moments.
void to_bloch_derivative(const EMoments& e, const EMoments& de, Eigen::Vector4d& dmeans,
                         Eigen::Matrix4d& ddelta);

ThirdMoments factorized_third_moments(const EMoments& e);

/// d<E_p>/dt and d<E_p E_q>/dt.
EMoments derivative(const EMoments& e, const ThirdMoments& third, const GeneratorRates& rates);

/// <E_p> and <E_p E_q> of a density matrix on a truncated basis.
EMoments exact_moments(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis);
ThirdMoments exact_third_moments(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis);

/// <ABC> minus its factorized value, per index triple.
ThirdMoments third_cumulants(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis);

}  // namespace ptbec::hierarchy
