#pragma once

// Bogoliubov backreaction: first moments (s, n) and the ten covariances
// Delta_jk evolved under the master equation with third moments factorized.
// Equations of motion come from the symbolic hierarchy in hierarchy.hpp.

#include "ptbec/fock.hpp"
#include "ptbec/hierarchy.hpp"
#include "ptbec/ode.hpp"
#include "ptbec/params.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ptbec {

/// (s_x, s_y, s_z, n) plus the symmetric covariance matrix Delta over
/// (L_x, L_y, L_z, n). Packed order: s_x, s_y, s_z, n, Delta_xx, Delta_xy,
/// Delta_xz, Delta_xn, Delta_yy, Delta_yz, Delta_yn, Delta_zz, Delta_zn, Delta_nn.
struct MomentState {
  static constexpr int kSize = 14;
  using Vector = Eigen::Matrix<double, kSize, 1>;

  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  double n = 0.0;
  Eigen::Matrix4d delta = Eigen::Matrix4d::Zero();

  Vector pack() const;
  static MomentState unpack(const Vector& v);
  static MomentState from_bloch(const BlochMoments& m);
  BlochMoments to_bloch() const;
  FirstMoments first() const { return {s[0], s[1], s[2], n}; }
  double purity() const { return ptbec::purity(first()); }
  /// sqrt(Delta_nn / 2) = sqrt(<n^2> - <n>^2).
  double number_uncertainty() const;
};

/// Interaction handling: fixed U, or U(t) = g / (n(t) - 1) re-evaluated at
/// every right-hand-side call.
struct BbrMode {
  enum class Kind { FixedU, ConstantG };
  Kind kind = Kind::FixedU;
  double value = 0.0;  ///< U or g

  static BbrMode fixed_u(double U) { return {Kind::FixedU, U}; }
  static BbrMode constant_g(double g) { return {Kind::ConstantG, g}; }

  /// Throws SingularityError in constant-g mode when n <= 1 + 1e-6.
  double interaction(double n) const;
  /// g reported alongside results: U (N0 - 1) for fixed U, g otherwise.
  double macroscopic_g(int N0) const;
  std::string describe() const;
};

/// Right-hand side with factorized third moments. Uses J, gamma, N0 from
/// params; the interaction comes from mode (params.U is ignored).
MomentState moment_rhs(const MomentState& state, const SystemParams& params, const BbrMode& mode);

/// Right-hand side at interaction U with externally supplied third moments.
MomentState moment_rhs(const MomentState& state, const SystemParams& params, double U,
                       const hierarchy::ThirdMoments& third);

/// Moments of the N0-particle binomial state with Bloch angles (theta, phi).
MomentState pure_state_moments(double theta, double phi, int N0);

struct BbrSample {
  double t = 0.0;
  MomentState state;
  double purity = 0.0;
};

struct BbrTrajectory {
  std::vector<BbrSample> samples;
  OdeStats stats;
};

BbrTrajectory integrate(const MomentState& initial, double t_final, const SystemParams& params,
                        const BbrMode& mode, const OdeOptions& options, double sample_dt);

struct RootSearchOptions {
  double tolerance = 1e-10;  ///< on the infinity norm of the right-hand side
  /// Large branches (moments ~1e6 near the divergence) cannot reach an absolute
  /// 1e-10 in double precision; the acceptance threshold is
  /// max(tolerance, relative_floor * |x|_inf).
  double relative_floor = 1e-15;
  int max_iterations = 200;
  double fd_step = 1e-6;  ///< relative finite-difference step for the Jacobian
  bool allow_fallback = true;
};

enum class RootStatus { Converged, Unphysical, NotFound };

struct RootResult {
  RootStatus status = RootStatus::NotFound;
  MomentState state;
  double residual = 0.0;  ///< infinity norm of moment_rhs at state
  double threshold = 0.0;  ///< residual bound that was applied
  int iterations = 0;
  std::string method;  ///< "newton" or "hybrid"

  bool found() const { return status != RootStatus::NotFound; }
  bool physical() const { return status == RootStatus::Converged; }
};

/// Physical iff P <= 1 + 1e-8 and every Delta diagonal >= -1e-8.
bool is_physical(const MomentState& state);

/// Damped Newton with a finite-difference Jacobian; on stagnation falls back
/// to a Powell hybrid (dogleg trust-region) solver.
RootResult steady_root_search(const SystemParams& params, const BbrMode& mode, const MomentState& guess,
                              const RootSearchOptions& options = {});

/// Exact U = 0 steady state (linear system) for the given J, gamma, N0.
MomentState noninteracting_steady_moments(const SystemParams& params);

/// Steady state at (params.gamma, mode) reached by continuation from the
/// U = 0 solution, ramping the interaction in steps.
RootResult steady_state_by_continuation(const SystemParams& params, const BbrMode& mode,
                                        const RootSearchOptions& options = {}, int ramp_steps = 10);

struct BranchPoint {
  double gamma = 0.0;
  double g = 0.0;
  bool exists = false;
  MomentState state;
  double purity = 0.0;
  double residual = 0.0;
};

struct Branch {
  std::vector<BranchPoint> points;
  /// Bisected end of the branch (resolution boundary_resolution), if found
  /// inside the scanned range.
  std::optional<double> boundary;
};

struct BranchOptions {
  double gamma_start = 0.1;
  double boundary_resolution = 1e-4;
  RootSearchOptions root;
};

/// Tracks the steady branch over an increasing gamma grid by warm-starting
/// from the previous point. The branch starts at options.gamma_start from the
/// continued U = 0 solution. Grid points past the first failure are reported
/// with exists = false.
Branch trace_branch(double J, int N0, const BbrMode& mode, const std::vector<double>& gammas,
                    const BranchOptions& options = {});

/// Columns: gamma,g,exists,s_x,s_y,s_z,n,P,Delta_n
void write_sweep_csv(std::ostream& os, const std::vector<BranchPoint>& points);

}  // namespace ptbec
