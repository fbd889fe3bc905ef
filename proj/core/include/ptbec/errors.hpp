#pragma once

#include <stdexcept>
#include <string>

namespace ptbec {

/// Base class of every failure raised by an engine. The CLI maps these to
/// exit status 3, everything else derived from std::invalid_argument to 2.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad cutoff, negative rate, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity that needs a nonzero particle number was asked of an empty state.
class DegenerateStateError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Probability leaked onto the boundary shell of the truncated Fock basis.
class TruncationOverflowError : public EngineError {
 public:
  TruncationOverflowError(const std::string& what, double mass, double ceiling)
      : EngineError(what), mass_(mass), ceiling_(ceiling) {}
  double mass() const noexcept { return mass_; }
  double ceiling() const noexcept { return ceiling_; }

 private:
  double mass_;
  double ceiling_;
};

class StepUnderflowError : public EngineError {
 public:
  StepUnderflowError(const std::string& what, double t, double h)
      : EngineError(what), t_(t), h_(h) {}
  double time() const noexcept { return t_; }
  double step() const noexcept { return h_; }

 private:
  double t_;
  double h_;
};

/// A closed form was evaluated outside the parameter regime it covers.
class RegimeError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// The non-interacting steady state does not exist (4J^2 = gamma_+^2 - gamma_-^2).
class DivergenceError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Constant-g replacement U = g/(n-1) evaluated at n <= 1.
class SingularityError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Non-oscillatory pair past its exceptional point.
class CoalescedError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Mean-field stationary states requested with gamma > 2J.
class PtBrokenError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Geometric single-mode distribution with gain >= loss.
class NonNormalizableError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Iterative solver ran out of iterations.
class ConvergenceError : public EngineError {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : EngineError(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace ptbec
