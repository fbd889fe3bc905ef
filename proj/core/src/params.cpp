#include "ptbec/params.hpp"

#include "ptbec/errors.hpp"

#include <cmath>
#include <string>

namespace ptbec {

BalancedRates balanced_rates(double gamma, int N0) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("gamma must be finite and >= 0 (got " + std::to_string(gamma) + ")");
  }
  if (N0 < 1) throw InvalidArgument("N0 must be >= 1 (got " + std::to_string(N0) + ")");
  BalancedRates r;
  r.loss = gamma;
  r.gain = gamma * N0 / (N0 + 2.0);
  r.minus = gamma / (N0 + 2.0);
  r.plus = gamma * (N0 + 1.0) / (N0 + 2.0);
  return r;
}

void SystemParams::validate() const {
  if (!(J > 0.0) || !std::isfinite(J)) throw InvalidArgument("J must be finite and > 0");
  if (!std::isfinite(U)) throw InvalidArgument("U must be finite");
  (void)balanced_rates(gamma, N0);
}

double SystemParams::interaction_from_g(double g, int N0) {
  if (N0 < 2) throw InvalidArgument("g = U (N0 - 1) needs N0 >= 2");
  return g / (N0 - 1.0);
}

}  // namespace ptbec
