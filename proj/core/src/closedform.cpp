#include "ptbec/closedform.hpp"

#include "ptbec/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ptbec {

namespace {

constexpr double kClampSlack = 1e-12;

// gamma_+^2 - gamma_-^2 = gamma_gain * gamma_loss
double rate_product(const SystemParams& p) {
  const BalancedRates r = p.rates();
  return r.gain * r.loss;
}

}  // namespace

AlphaState steady_alpha(const SystemParams& params) {
  params.validate();
  const double J2 = 4.0 * params.J * params.J;
  const double prod = rate_product(params);
  const double den = J2 - prod;
  if (std::abs(den) <= 1e-14 * J2) {
    throw DivergenceError("no U = 0 steady state at 4J^2 = gamma_+^2 - gamma_-^2 (gamma = " +
                          std::to_string(params.gamma) + ")");
  }
  // The prefactor ratios (2J / gamma_-, 4J^2 / (gamma_- gamma)) are folded in
  // analytically so that gamma = 0 needs no special case.
  const double N0 = params.N0;
  AlphaState a;
  a.a1 = 0.0;
  a.a2 = 2.0 * params.J * params.gamma * N0 / den;
  a.a3 = prod / den;
  a.a4 = a.a3 + J2 * N0 / den;
  return a;
}

OscillatorySolution::OscillatorySolution(const SystemParams& params, const AlphaState& alpha,
                                         const OscillatoryParams& kappa)
    : J_(params.J), gminus_(params.gamma_minus()), gplus_(params.gamma_plus()), alpha_(alpha), kappa_(kappa) {}

FirstMoments OscillatorySolution::evaluate(double t) const {
  const double decay = std::exp(-gminus_ * t);
  const double phase = kappa_.omega * t - kappa_.kappa4;
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  FirstMoments m;
  m.sx = alpha_.a1 + kappa_.kappa1 * decay;
  m.sy = alpha_.a2 + (gplus_ * kappa_.kappa2 + 2.0 * J_ * kappa_.kappa3 * c) * decay;
  m.sz = alpha_.a3 - kappa_.omega * kappa_.kappa3 * s * decay;
  m.n = alpha_.a4 + (2.0 * J_ * kappa_.kappa2 + gplus_ * kappa_.kappa3 * c) * decay;
  return m;
}

OscillatorySolution OscillatorySolution::mirrored() const {
  OscillatorySolution copy = *this;
  copy.kappa_.kappa1 = -kappa_.kappa1;
  return copy;
}

OscillatorySolution oscillatory_solution(const FirstMoments& initial, const SystemParams& params) {
  params.validate();
  const double gp = params.gamma_plus();
  const double w2 = 4.0 * params.J * params.J - gp * gp;
  if (!(w2 > 0.0)) {
    throw RegimeError("closed-form solution needs gamma_+^2 < 4J^2 (gamma = " + std::to_string(params.gamma) +
                      ")");
  }
  const AlphaState alpha = steady_alpha(params);
  const double dy = initial.sy - alpha.a2;
  const double dz = initial.sz - alpha.a3;
  const double dn = initial.n - alpha.a4;

  OscillatoryParams k;
  k.omega = std::sqrt(w2);
  k.kappa1 = initial.sx - alpha.a1;
  k.kappa2 = (2.0 * params.J * dn - gp * dy) / w2;
  const double k1 = (2.0 * params.J * dy - gp * dn) / w2;
  const double k2 = dz / k.omega;
  k.kappa3 = std::hypot(k1, k2);
  k.kappa4 = std::atan2(k2, k1);
  return OscillatorySolution(params, alpha, k);
}

NonOscillatoryPair nonoscillatory_states(const SystemParams& params) {
  params.validate();
  const double J = params.J;
  const double J2 = 4.0 * J * J;
  const double gp = params.gamma_plus();
  if (!(gp * gp < J2)) {
    throw RegimeError("non-oscillatory states need gamma_+^2 < 4J^2 (gamma = " + std::to_string(params.gamma) +
                      ")");
  }
  const double N0 = params.N0;
  const double g2 = params.gamma * params.gamma;
  const AlphaState alpha = steady_alpha(params);

  NonOscillatoryPair out;
  const double cos_theta = alpha.a3 / N0;
  if (std::abs(cos_theta) > 1.0) {
    throw CoalescedError("no pure state with s_z = alpha_3 (|cos theta| = " + std::to_string(cos_theta) + ")");
  }
  out.theta = std::acos(cos_theta);
  out.kappa2 = (N0 - alpha.a4) / (2.0 * J);

  const double r = (N0 + 1.0) / (N0 + 2.0);
  const double f1 = J2 - r * r * g2;
  const double f2 = J2 - r * g2;
  const double f3 = J2 - (N0 - 1.0) / (N0 + 2.0) * g2;
  if (!(f2 > 0.0) || !(f3 > 0.0)) {
    throw CoalescedError("non-oscillatory states do not exist at gamma = " + std::to_string(params.gamma));
  }
  double arg = params.gamma / (2.0 * J) * f1 / std::sqrt(f2 * f3);
  out.argument = arg;
  if (std::abs(arg) > 1.0 + kClampSlack) {
    throw CoalescedError("non-oscillatory states have coalesced (arccos argument " + std::to_string(arg) +
                         " at gamma = " + std::to_string(params.gamma) + ")");
  }
  if (std::abs(arg) >= 1.0) {
    arg = std::copysign(1.0, arg);
    out.coalesced = true;
  }

  const double sy0 = alpha.a2 + gp * out.kappa2;
  if (!(sy0 > 0.0) && params.gamma > 0.0) {
    throw RegimeError("expected s_y(0) > 0 for the non-oscillatory states, got " + std::to_string(sy0));
  }
  const double a = std::acos(arg);
  out.phi_minus = std::numbers::pi / 2.0 - a;
  out.phi_plus = std::numbers::pi / 2.0 + a;
  const double sx_abs = std::sqrt(std::max(0.0, N0 * N0 - sy0 * sy0 - alpha.a3 * alpha.a3));
  out.kappa1_minus = sx_abs;
  out.kappa1_plus = -sx_abs;
  return out;
}

double critical_gamma(int N0, double J) {
  if (N0 < 1) throw InvalidArgument("N0 must be >= 1");
  return 2.0 * J * (N0 + 2.0) / (N0 + 1.0);
}

double divergence_gamma(int N0, double J) {
  if (N0 < 1) throw InvalidArgument("N0 must be >= 1");
  return 2.0 * J * std::sqrt((N0 + 2.0) / N0);
}

SteadyPurity steady_purity(const SystemParams& params) {
  params.validate();
  const double x = params.gamma * params.gamma / (4.0 * params.J * params.J);
  const double m = params.N0 + 2.0;
  SteadyPurity p;
  p.approx = x;
  p.exact = x * (m * m + x) / ((m + x) * (m + x));
  p.physical = p.exact <= 1.0;
  return p;
}

double tunneling_current(const Eigen::Vector2cd& u, double J) {
  return 2.0 * J * std::abs(u[0]) * std::abs(u[1]) * std::sin(std::arg(u[0]) - std::arg(u[1]));
}

SteadySpdmEigen steady_spdm_eigen(const SystemParams& params) {
  const SteadyPurity P = steady_purity(params);
  const double gm = params.gamma_minus();
  const double c = gm / std::sqrt(4.0 * params.J * params.J + gm * gm);
  const double root = std::sqrt(std::max(0.0, P.exact));
  const cplx i(0.0, 1.0);

  SteadySpdmEigen e;
  e.eigenvalues << 0.5 * (1.0 + root), 0.5 * (1.0 - root);
  e.eigenvectors(0, 0) = std::sqrt(1.0 - c) * i / std::sqrt(2.0);
  e.eigenvectors(1, 0) = std::sqrt(1.0 + c) / std::sqrt(2.0);
  e.eigenvectors(0, 1) = -std::sqrt(1.0 + c) * i / std::sqrt(2.0);
  e.eigenvectors(1, 1) = std::sqrt(1.0 - c) / std::sqrt(2.0);
  for (int k = 0; k < 2; ++k) e.currents[k] = tunneling_current(e.eigenvectors.col(k), params.J);
  return e;
}

SingleModeSteady::SingleModeSteady(double gain, double loss) {
  if (!(gain >= 0.0) || !std::isfinite(gain) || !std::isfinite(loss)) {
    throw InvalidArgument("single-mode rates must be finite and gain >= 0");
  }
  if (!(loss > gain)) {
    throw NonNormalizableError("single-mode steady state needs gain < loss (gain = " + std::to_string(gain) +
                               ", loss = " + std::to_string(loss) + ")");
  }
  xi_ = gain / loss;
}

double SingleModeSteady::probability(int j) const {
  if (j < 0) return 0.0;
  return (1.0 - xi_) * std::pow(xi_, j);
}

std::vector<double> SingleModeSteady::probabilities(int j_max) const {
  std::vector<double> p;
  for (int j = 0; j <= j_max; ++j) p.push_back(probability(j));
  return p;
}

SingleModeSteady single_mode_steady(double gain, double loss) { return SingleModeSteady(gain, loss); }

std::vector<double> combined_product_probs(double xi, int j_max) {
  if (!(xi >= 0.0) || !(xi < 1.0)) {
    throw NonNormalizableError("product distribution needs 0 <= xi < 1 (xi = " + std::to_string(xi) + ")");
  }
  std::vector<double> q;
  for (int j = 0; j <= j_max; ++j) q.push_back((1.0 - xi) * (1.0 - xi) * std::pow(xi, j) * (j + 1.0));
  return q;
}

}  // namespace ptbec
