#pragma once

// Non-equilibrium steady state of the full master equation on a truncated
// basis: L(rho) = 0 with Tr rho = 1, solved by restarted GMRES on the
// number-diagonal sector with one balance row replaced by the trace row.

#include "ptbec/fock.hpp"
#include "ptbec/liouville.hpp"
#include "ptbec/params.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ptbec {

enum class Preconditioner { None, Jacobi, IncompleteLUT };
enum class StartVector { GeometricProduct, MaximallyMixed };

struct SteadySolveConfig {
  double tolerance = 1e-10;  ///< on max |L(rho)|_ij
  int max_iterations = 20000;
  int restart = 200;
  double truncation_ceiling = 1e-6;
  Preconditioner preconditioner = Preconditioner::IncompleteLUT;
  StartVector start = StartVector::GeometricProduct;
  /// Negative eigenvalues with magnitude below this are clipped to zero.
  double clip_threshold = 1e-10;

  void validate() const;
};

struct SteadyDiagnostics {
  double residual = 0.0;          ///< max |L(rho)|_ij, operator route, after post-processing
  double solver_residual = 0.0;   ///< relative residual reported by the Krylov solver
  int iterations = 0;
  int solves = 0;                 ///< Krylov (re)starts from the refined guess
  double truncation_mass = 0.0;
  double eigenvalue_floor = 0.0;  ///< smallest eigenvalue of rho
  double hermiticity_defect = 0.0;  ///< max |rho - rho^dag| / 2 removed by hermitization
  int clipped_eigenvalues = 0;
  double clipped_weight = 0.0;    ///< sum of the clipped negative eigenvalues
  double trace_correction = 0.0;  ///< |Tr rho - 1| before renormalization
  Index system_size = 0;
  std::string preconditioner;
};

struct SteadyState {
  Eigen::MatrixXcd rho;
  BlochMoments moments;
  double purity = 0.0;
  double number_uncertainty = 0.0;
  SteadyDiagnostics diagnostics;

  DensityMatrix density() const { return DensityMatrix(rho); }
};

/// Throws InvalidArgument for gamma = 0, ConvergenceError if the residual
/// contract is missed, TruncationOverflowError if the boundary shell carries
/// more than the ceiling.
SteadyState solve_steady(const SystemParams& params, const TwoModeBasis& basis, const SteadySolveConfig& config = {});

struct AttractorRun {
  std::string label;
  std::vector<double> times;
  std::vector<double> distances;  ///< trace distance to rho_ss
  double fitted_rate = 0.0;       ///< -d log D / dt over the second half of the horizon
  bool monotone_after_transient = true;
};

struct AttractorReport {
  std::vector<AttractorRun> runs;
  double mean_rate = 0.0;
};

/// Mixes rho_ss with weight `scale` of three number-diagonal probe states
/// (|N0,0>, |0,N0>, a binomial state) and follows the trace distance to
/// rho_ss up to t_horizon.
AttractorReport verify_attractor(const Eigen::MatrixXcd& rho_ss, const SystemParams& params,
                                 const TwoModeBasis& basis, double scale, double t_horizon,
                                 const PropagationConfig& propagation);

/// Columns: n1,n2,p
void write_steady_diagonal_csv(std::ostream& os, const Eigen::MatrixXcd& rho, const TwoModeBasis& basis);

}  // namespace ptbec
