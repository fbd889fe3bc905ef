#pragma once

namespace ptbec {

/// Gain and loss rates tied together by the balance condition
/// gamma_loss = (N0 + 2) / N0 * gamma_gain = gamma.
struct BalancedRates {
  double gain = 0.0;
  double loss = 0.0;
  double minus = 0.0;  ///< (loss - gain) / 2 = gamma / (N0 + 2)
  double plus = 0.0;   ///< (loss + gain) / 2 = gamma (N0 + 1) / (N0 + 2)
};

BalancedRates balanced_rates(double gamma, int N0);

/// Model parameters. Energies and rates are in units of J (hbar = 1).
struct SystemParams {
  double J = 1.0;
  double U = 0.0;
  double gamma = 0.0;
  int N0 = 1;

  /// Throws InvalidArgument unless J > 0, gamma >= 0, N0 >= 1, all finite.
  void validate() const;

  BalancedRates rates() const { return balanced_rates(gamma, N0); }
  double gamma_gain() const { return rates().gain; }
  double gamma_loss() const { return rates().loss; }
  double gamma_minus() const { return rates().minus; }
  double gamma_plus() const { return rates().plus; }

  /// Macroscopic interaction g = U (N0 - 1) and its inverse.
  double macroscopic_g() const { return U * (N0 - 1); }
  static double interaction_from_g(double g, int N0);
};

}  // namespace ptbec
