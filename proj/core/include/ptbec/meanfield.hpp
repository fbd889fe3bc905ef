#pragma once

// Discrete PT-symmetric Gross-Pitaevskii equation
//   i c1' = -J c2 + g |c1|^2 c1 - i gamma/2 c1
//   i c2' = -J c1 + g |c2|^2 c2 + i gamma/2 c2
// and its angle representation phi = arg(c1 c2^*), theta = acos(1 - 2|c1|^2/n).

#include "ptbec/ode.hpp"

#include <Eigen/Core>

#include <complex>
#include <iosfwd>
#include <vector>

namespace ptbec {

struct MeanFieldState {
  std::complex<double> c1;
  std::complex<double> c2;

  double norm() const { return std::norm(c1) + std::norm(c2); }
  Eigen::Vector2cd vector() const { return {c1, c2}; }
  static MeanFieldState from_vector(const Eigen::Vector2cd& v) { return {v[0], v[1]}; }
};

struct AngleRepr {
  double phi = 0.0;    ///< in (-pi, pi]
  double theta = 0.0;  ///< in [0, pi]
};

MeanFieldState gpe_rhs(const MeanFieldState& psi, double J, double g, double gamma);

/// Angles of the normalized state. Throws DegenerateStateError on a zero state.
AngleRepr angles(const MeanFieldState& psi);

/// Unit-norm state c1 = sin(theta/2) e^{i phi}, c2 = cos(theta/2).
MeanFieldState state_from_angles(const AngleRepr& a);

/// (sin theta cos phi, sin theta sin phi, cos theta) of the normalized state.
Eigen::Vector3d reduced_bloch(const MeanFieldState& psi);

/// (d phi/dt, d theta/dt) under the GPE flow. Needs both amplitudes nonzero.
Eigen::Vector2d angle_velocity(const MeanFieldState& psi, double J, double g, double gamma);

struct GpeSample {
  double t = 0.0;
  MeanFieldState psi;
  AngleRepr angles;
  Eigen::Vector3d bloch = Eigen::Vector3d::Zero();
  double norm = 0.0;
};

struct GpeTrajectory {
  std::vector<GpeSample> samples;
  OdeStats stats;
};

/// The norm is never renormalized during integration.
GpeTrajectory integrate_gpe(const MeanFieldState& psi0, double t_final, double J, double g, double gamma,
                            const OdeOptions& options, double sample_dt);

/// Ground (phi = pi/2 - acos(gamma/2J)) and excited (pi/2 + acos) states with
/// theta = pi/2. Throws PtBrokenError for gamma > 2J.
struct PtStationaryStates {
  AngleRepr ground;
  AngleRepr excited;
};
PtStationaryStates pt_stationary_states(double J, double gamma);

/// Columns: t,Re_c1,Im_c1,Re_c2,Im_c2,phi,theta,n_mf
void write_gpe_csv(std::ostream& os, const GpeTrajectory& trajectory);

}  // namespace ptbec
