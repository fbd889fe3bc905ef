#include "ptbec/meanfield.hpp"

#include "ptbec/csv.hpp"
#include "ptbec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ptbec {

MeanFieldState gpe_rhs(const MeanFieldState& psi, double J, double g, double gamma) {
  const std::complex<double> I(0.0, 1.0);
  const auto c1 = psi.c1, c2 = psi.c2;
  // c' = -i (right-hand side of i c' = ...)
  MeanFieldState d;
  d.c1 = -I * (-J * c2 + g * std::norm(c1) * c1) - 0.5 * gamma * c1;
  d.c2 = -I * (-J * c1 + g * std::norm(c2) * c2) + 0.5 * gamma * c2;
  return d;
}

AngleRepr angles(const MeanFieldState& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw DegenerateStateError("angles of the zero mean-field state are undefined");
  AngleRepr a;
  a.phi = std::arg(psi.c1 * std::conj(psi.c2));
  a.theta = std::acos(std::clamp(1.0 - 2.0 * std::norm(psi.c1) / n, -1.0, 1.0));
  return a;
}

MeanFieldState state_from_angles(const AngleRepr& a) {
  return {std::polar(std::sin(0.5 * a.theta), a.phi), std::complex<double>(std::cos(0.5 * a.theta), 0.0)};
}

Eigen::Vector3d reduced_bloch(const MeanFieldState& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw DegenerateStateError("Bloch vector of the zero mean-field state is undefined");
  const std::complex<double> w = psi.c1 * std::conj(psi.c2);
  // s_x + i s_y = 2 c1 c2^*, s_z = |c2|^2 - |c1|^2 (per particle)
  return Eigen::Vector3d(2.0 * w.real(), 2.0 * w.imag(), std::norm(psi.c2) - std::norm(psi.c1)) / n;
}

Eigen::Vector2d angle_velocity(const MeanFieldState& psi, double J, double g, double gamma) {
  const MeanFieldState d = gpe_rhs(psi, J, g, gamma);
  const std::complex<double> w = psi.c1 * std::conj(psi.c2);
  if (std::abs(w) == 0.0) throw DegenerateStateError("angle velocity needs both amplitudes nonzero");
  const std::complex<double> dw = d.c1 * std::conj(psi.c2) + psi.c1 * std::conj(d.c2);
  const double dphi = (dw / w).imag();
  // cos theta = z = (|c2|^2 - |c1|^2) / n, d theta = -dz / sin theta
  const double n = psi.norm();
  const double a = std::norm(psi.c1), b = std::norm(psi.c2);
  const double da = 2.0 * std::real(std::conj(psi.c1) * d.c1);
  const double db = 2.0 * std::real(std::conj(psi.c2) * d.c2);
  const double dz = ((db - da) * n - (b - a) * (da + db)) / (n * n);
  const double sin_theta = 2.0 * std::sqrt(a * b) / n;
  return Eigen::Vector2d(dphi, -dz / sin_theta);
}

GpeTrajectory integrate_gpe(const MeanFieldState& psi0, double t_final, double J, double g, double gamma,
                            const OdeOptions& options, double sample_dt) {
  GpeTrajectory traj;
  Eigen::Vector2cd y = psi0.vector();
  auto rhs = [&](double, const Eigen::Vector2cd& x, Eigen::Vector2cd& dx) {
    dx = gpe_rhs(MeanFieldState::from_vector(x), J, g, gamma).vector();
  };
  auto sample = [&](double t, const Eigen::Vector2cd& x) {
    GpeSample s;
    s.t = t;
    s.psi = MeanFieldState::from_vector(x);
    s.norm = s.psi.norm();
    if (s.norm > 0.0) {
      s.angles = angles(s.psi);
      s.bloch = reduced_bloch(s.psi);
    }
    traj.samples.push_back(s);
  };
  traj.stats = integrate_dopri5(rhs, y, 0.0, t_final, sample_dt, options, sample);
  return traj;
}

PtStationaryStates pt_stationary_states(double J, double gamma) {
  if (!(J > 0.0) || !(gamma >= 0.0)) throw InvalidArgument("need J > 0 and gamma >= 0");
  const double x = gamma / (2.0 * J);
  if (x > 1.0) {
    throw PtBrokenError("no PT-symmetric stationary states for gamma > 2J (gamma = " + std::to_string(gamma) + ")");
  }
  const double a = std::acos(x);
  PtStationaryStates s;
  s.ground = {std::numbers::pi / 2.0 - a, std::numbers::pi / 2.0};
  s.excited = {std::numbers::pi / 2.0 + a, std::numbers::pi / 2.0};
  return s;
}

void write_gpe_csv(std::ostream& os, const GpeTrajectory& trajectory) {
  CsvWriter w(os, {"t", "Re_c1", "Im_c1", "Re_c2", "Im_c2", "phi", "theta", "n_mf"});
  for (const GpeSample& s : trajectory.samples) {
    w.row({s.t, s.psi.c1.real(), s.psi.c1.imag(), s.psi.c2.real(), s.psi.c2.imag(), s.angles.phi, s.angles.theta,
           s.norm});
  }
}

}  // namespace ptbec
