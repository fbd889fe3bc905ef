#pragma once

// Lindblad generator for the two-site Bose-Hubbard model with loss on site 1
// and gain on site 2, and time propagation of density matrices under it:
//
//   d rho/dt = -i[H, rho] + gamma_loss D[a1] rho + gamma_gain D[a2^dag] rho,
//   D[c] rho = c rho c^dag - 1/2 {c^dag c, rho}.

#include "ptbec/fock.hpp"
#include "ptbec/ode.hpp"
#include "ptbec/params.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

namespace ptbec {

/// Which matrix elements rho_ij the vectorized state carries. The generator
/// never couples elements with different (n_i - n_j) total-number offsets, so
/// the number-diagonal block (equal total number on both sides) is closed and
/// holds every steady state and every state prepared with definite or mixed
/// particle number.
enum class Sector { Full, NumberDiagonal };

/// Superoperator of the master equation on the column-stacked density matrix
/// (slot of rho_ij is i + j * dim for the full sector; the number-diagonal
/// sector keeps the same order with the absent elements skipped).
/// Immutable and cheap to copy; share one instance across workers.
class Liouvillian {
 public:
  using RowMajorMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  const RowMajorMatrix& matrix() const noexcept { return data_->matrix; }
  SparseOperator superoperator() const;
  Sector sector() const noexcept { return data_->sector; }
  const TwoModeBasis& basis() const noexcept { return data_->basis; }
  const SystemParams& params() const noexcept { return data_->params; }
  Index size() const noexcept { return static_cast<Index>(data_->rows.size()); }

  /// Vector slot of rho_ij, or -1 when the element lies outside the sector.
  Index slot(Index row, Index col) const;
  Index row_of(Index k) const { return data_->rows[static_cast<std::size_t>(k)]; }
  Index col_of(Index k) const { return data_->cols[static_cast<std::size_t>(k)]; }
  /// Slot of rho_ji for the element in slot k.
  Index adjoint_slot(Index k) const { return data_->adjoint[static_cast<std::size_t>(k)]; }
  /// Slots of the diagonal elements rho_ii, in basis order.
  const std::vector<Index>& diagonal_slots() const noexcept { return data_->diagonal; }

  /// Throws InvalidArgument when rho has weight outside the sector.
  Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) const;
  Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v) const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix() * v; }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const { return unvectorize(apply(vectorize(rho))); }

  /// v <- (v + v^dag) / 2 in vectorized form.
  void hermitize(Eigen::VectorXcd& v) const;
  cplx trace(const Eigen::VectorXcd& v) const;
  double boundary_mass(const Eigen::VectorXcd& v) const;

 private:
  friend Liouvillian build_liouvillian(const SystemParams&, const TwoModeBasis&, Sector);
  struct Data {
    SystemParams params;
    TwoModeBasis basis{1};
    Sector sector = Sector::Full;
    RowMajorMatrix matrix;
    std::vector<Index> rows, cols, adjoint, diagonal;
    std::vector<Index> slot_of;  // dim*dim entries, -1 if absent
  };
  explicit Liouvillian(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

Liouvillian build_liouvillian(const SystemParams& params, const TwoModeBasis& basis,
                              Sector sector = Sector::Full);

/// Right-hand side of the master equation evaluated with operator products on
/// the matrix itself, independent of the superoperator assembly.
Eigen::MatrixXcd apply_master_equation(const Eigen::MatrixXcd& rho, const SystemParams& params,
                                       const TwoModeBasis& basis);

struct PropagationConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  double sample_interval = 0.1;  ///< observable sampling interval; <= 0 samples end points only
  double truncation_ceiling = 1e-6;
  bool keep_snapshots = false;

  void validate() const;
  OdeOptions ode() const;
};

struct TrajectorySample {
  double t = 0.0;
  BlochMoments moments;
  double purity = 0.0;  ///< NaN when n == 0
  double truncation_mass = 0.0;
  double trace = 1.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<Eigen::MatrixXcd> snapshots;  ///< filled when keep_snapshots
  Eigen::MatrixXcd final_state;
  OdeStats stats;
  double max_trace_error = 0.0;
};

/// Called with the density matrix at every sample time.
using SnapshotObserver = std::function<void(double t, const Eigen::MatrixXcd& rho)>;

/// Adaptive Dormand-Prince propagation of rho0 to t_final. Throws
/// TruncationOverflowError if the boundary-shell probability exceeds the
/// ceiling at any accepted step, StepUnderflowError if the controller stalls.
Trajectory propagate(const DensityMatrix& rho0, double t_final, const Liouvillian& L,
                     const PropagationConfig& config, const SnapshotObserver& observer = {});

/// Builds the generator for params; uses the number-diagonal sector whenever
/// rho0 carries no coherence between different total particle numbers.
Trajectory propagate(const DensityMatrix& rho0, double t_final, const SystemParams& params,
                     const TwoModeBasis& basis, const PropagationConfig& config);

/// Columns: t,s_x,s_y,s_z,n,P,Delta_nn,truncation_mass
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace ptbec
