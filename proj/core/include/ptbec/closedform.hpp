#pragma once

// Exact results of the non-interacting (U = 0) model: the first-moment
// solution in the oscillatory regime, its steady state, the two
// non-oscillatory pure initial states, steady-state purity and single-particle
// density matrix, and the single-mode geometric steady state.

#include "ptbec/fock.hpp"
#include "ptbec/params.hpp"

#include <vector>

namespace ptbec {

/// Steady-state first moments (s_x, s_y, s_z, n) = (a1, a2, a3, a4).
struct AlphaState {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;

  double sy_reduced() const { return a2 / a4; }
  double sz_reduced() const { return a3 / a4; }
  FirstMoments moments() const { return {a1, a2, a3, a4}; }
};

/// Constant solution of the U = 0 first-moment equations. Continuous at
/// gamma = 0, where it reduces to (0, 0, 0, N0). Throws DivergenceError at
/// 4J^2 = gamma_+^2 - gamma_-^2.
AlphaState steady_alpha(const SystemParams& params);

struct OscillatoryParams {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;  ///< amplitude, >= 0
  double kappa4 = 0.0;  ///< phase in (-pi, pi]
  double omega = 0.0;   ///< sqrt(4J^2 - gamma_+^2)
};

/// s_x(t) = a1 + k1 e^{-g t}
/// s_y(t) = a2 + [g+ k2 + 2J k3 cos(w t - k4)] e^{-g t}
/// s_z(t) = a3 - w k3 sin(w t - k4) e^{-g t}
/// n(t)   = a4 + [2J k2 + g+ k3 cos(w t - k4)] e^{-g t}
/// with g = gamma_-, g+ = gamma_+, w = omega.
class OscillatorySolution {
 public:
  OscillatorySolution(const SystemParams& params, const AlphaState& alpha, const OscillatoryParams& kappa);

  FirstMoments evaluate(double t) const;
  const OscillatoryParams& kappa() const noexcept { return kappa_; }
  const AlphaState& alpha() const noexcept { return alpha_; }

  /// The same trajectory with kappa1 -> -kappa1 (mirror image in s_x).
  OscillatorySolution mirrored() const;

 private:
  double J_;
  double gminus_;
  double gplus_;
  AlphaState alpha_;
  OscillatoryParams kappa_;
};

/// Fits the kappas to the initial first moments. The amplitude/phase pair is
/// taken as kappa3 = hypot(k1, k2), kappa4 = atan2(k2, k1), which keeps
/// kappa3 >= 0 and stays defined at k1 = 0. Throws RegimeError unless
/// gamma_+^2 < 4J^2.
OscillatorySolution oscillatory_solution(const FirstMoments& initial, const SystemParams& params);

/// The two pure N0-particle initial states whose U = 0 trajectory does not
/// oscillate (kappa3 = 0). phi_minus pairs with kappa1_minus > 0 and becomes
/// the mean-field ground state for N0 -> infinity.
struct NonOscillatoryPair {
  double theta = 0.0;
  double phi_minus = 0.0;
  double phi_plus = 0.0;
  double kappa1_minus = 0.0;
  double kappa1_plus = 0.0;
  double kappa2 = 0.0;
  double argument = 0.0;  ///< the arccosine argument; 1 at coalescence
  bool coalesced = false;
};

/// Throws CoalescedError when the arccosine argument leaves [-1, 1] by more
/// than 1e-12 (past the exceptional point), RegimeError outside the
/// oscillatory regime or if the s_y(0) > 0 sign assumption fails.
NonOscillatoryPair nonoscillatory_states(const SystemParams& params);

/// gamma at which gamma_+ = 2J: 2J (N0 + 2) / (N0 + 1).
double critical_gamma(int N0, double J = 1.0);

/// gamma at which the U = 0 steady state diverges: 2J sqrt((N0 + 2) / N0).
double divergence_gamma(int N0, double J = 1.0);

struct SteadyPurity {
  double exact = 0.0;
  double approx = 0.0;  ///< gamma^2 / 4J^2
  bool physical = true;  ///< exact <= 1
};

SteadyPurity steady_purity(const SystemParams& params);

/// Eigen-decomposition of the normalized steady-state single-particle density
/// matrix: lambda = (1 +- sqrt(P)) / 2 with eigenvector columns u1, u2.
struct SteadySpdmEigen {
  Eigen::Vector2d eigenvalues;
  Eigen::Matrix2cd eigenvectors;
  /// 2J r1 r2 sin(beta1 - beta2) for each eigenvector (site 2 -> site 1).
  Eigen::Vector2d currents;
};

SteadySpdmEigen steady_spdm_eigen(const SystemParams& params);

/// Tunneling current from site 2 to site 1 of a single-particle state.
double tunneling_current(const Eigen::Vector2cd& u, double J);

/// p_j = (1 - xi) xi^j with xi = gain / loss.
class SingleModeSteady {
 public:
  /// Throws NonNormalizableError unless 0 <= gain < loss.
  SingleModeSteady(double gain, double loss);

  double xi() const noexcept { return xi_; }
  double probability(int j) const;
  std::vector<double> probabilities(int j_max) const;

 private:
  double xi_;
};

SingleModeSteady single_mode_steady(double gain, double loss);

/// q(j) = (1 - xi)^2 xi^j (j + 1) for j = 0..j_max.
std::vector<double> combined_product_probs(double xi, int j_max);

}  // namespace ptbec
