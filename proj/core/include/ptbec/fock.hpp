#pragma once

// Truncated two-mode Fock space, second-quantized operators on it, and the
// observables extracted from density matrices (Bloch moments, covariances,
// purity, occupation distributions).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <utility>
#include <vector>

namespace ptbec {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Basis states |n1,n2> with 0 <= n1,n2 <= cutoff, flattened row-major:
/// index = n1 * (cutoff + 1) + n2.
class TwoModeBasis {
 public:
  explicit TwoModeBasis(int cutoff);

  int cutoff() const noexcept { return cutoff_; }
  int levels() const noexcept { return cutoff_ + 1; }
  Index dim() const noexcept { return static_cast<Index>(levels()) * levels(); }

  Index index(int n1, int n2) const;
  std::pair<int, int> occupation(Index i) const;
  int total(Index i) const { auto [a, b] = occupation(i); return a + b; }
  bool on_boundary(Index i) const;

  bool operator==(const TwoModeBasis& other) const = default;

 private:
  int cutoff_;
};

TwoModeBasis build_basis(int cutoff);

/// Complex sparse matrix on a TwoModeBasis (or on its vectorized square).
class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(SparseMatrix m);

  Index dim() const noexcept { return m_.rows(); }
  const SparseMatrix& matrix() const noexcept { return m_; }
  cplx coeff(Index row, Index col) const { return m_.coeff(row, col); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return m_ * v; }
  SparseOperator adjoint() const;
  SparseOperator operator*(const SparseOperator& rhs) const;
  SparseOperator operator+(const SparseOperator& rhs) const;
  SparseOperator operator-(const SparseOperator& rhs) const;
  SparseOperator operator*(cplx s) const;

 private:
  SparseMatrix m_;
};

enum class Site { One = 1, Two = 2 };
enum class Ladder { Annihilate, Create, Number };

/// Bosonic ladder/number operators. Creation is truncated: a^dag|cutoff> = 0.
SparseOperator mode_operator(const TwoModeBasis& basis, Site site, Ladder kind);

/// H = -J (a1^dag a2 + a2^dag a1) + U/2 (a1^dag a1^dag a1 a1 + a2^dag a2^dag a2 a2)
SparseOperator hamiltonian(const TwoModeBasis& basis, double J, double U);

/// The four Hermitian operators L_x, L_y, L_z, n (index order x, y, z, n).
struct BlochOperators {
  std::array<SparseOperator, 4> ops;
  const SparseOperator& operator[](int k) const { return ops[static_cast<std::size_t>(k)]; }
};
BlochOperators bloch_operators(const TwoModeBasis& basis);

/// Hermitian, unit-trace matrix on a TwoModeBasis. Construction hermitizes
/// the input and rejects |Tr - 1| >= 1e-8 or a diagonal entry below -1e-8.
class DensityMatrix {
 public:
  static constexpr double kTraceTolerance = 1e-8;
  static constexpr double kDiagonalFloor = -1e-8;

  explicit DensityMatrix(Eigen::MatrixXcd m);

  /// |psi><psi| / <psi|psi>.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix basis_state(const TwoModeBasis& basis, int n1, int n2);

  Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
  cplx operator()(Index r, Index c) const { return m_(r, c); }
  double trace() const { return m_.trace().real(); }

 private:
  Eigen::MatrixXcd m_;
};

/// Tr(rho A).
cplx expectation(const Eigen::MatrixXcd& rho, const SparseOperator& op);

struct FirstMoments {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  double n = 0.0;
};

/// s_j = 2 <L_j>, n = <n>, and the covariances
/// Delta_jk = <A_j A_k + A_k A_j> - 2 <A_j><A_k>, A in {L_x, L_y, L_z, n}.
struct BlochMoments {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  double n = 0.0;
  Eigen::Matrix4d delta = Eigen::Matrix4d::Zero();

  FirstMoments first() const { return {sx, sy, sz, n}; }
};

/// Caches the Bloch operators and their pairwise products for one basis.
class MomentEvaluator {
 public:
  explicit MomentEvaluator(const TwoModeBasis& basis);
  BlochMoments operator()(const Eigen::MatrixXcd& rho) const;
  const TwoModeBasis& basis() const noexcept { return basis_; }

 private:
  TwoModeBasis basis_;
  BlochOperators ops_;
  std::array<std::array<SparseOperator, 4>, 4> products_;
};

BlochMoments bloch_moments(const DensityMatrix& rho, const TwoModeBasis& basis);

/// P = (sx^2 + sy^2 + sz^2) / n^2. Throws DegenerateStateError for n <= 0.
double purity(const FirstMoments& m);
inline double purity(const BlochMoments& m) { return purity(m.first()); }

/// p(j) for j = 0..cutoff. Entries in (-1e-8, 0) are reported as 0.
std::vector<double> site_distribution(const DensityMatrix& rho, const TwoModeBasis& basis, Site site);

/// q(j) = sum_k <k, j-k|rho|k, j-k> for j = 0..2*cutoff.
std::vector<double> total_number_distribution(const DensityMatrix& rho, const TwoModeBasis& basis);

/// sigma_jk = <a_k^dag a_j> with its eigen-decomposition (eigenvalues descending).
struct SingleParticleDM {
  Eigen::Matrix2cd sigma;
  Eigen::Vector2d eigenvalues;
  Eigen::Matrix2cd eigenvectors;  // columns, orthonormal
  double n = 0.0;

  Eigen::Vector2d normalized_eigenvalues() const { return eigenvalues / n; }
};

SingleParticleDM single_particle_dm(const DensityMatrix& rho, const TwoModeBasis& basis);
SingleParticleDM single_particle_dm(const Eigen::Matrix2cd& sigma);

/// Probability on states with n1 == cutoff or n2 == cutoff.
double truncation_mass(const DensityMatrix& rho, const TwoModeBasis& basis);
double truncation_mass(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis);

/// N-particle product state (c1 a1^dag + c2 a2^dag)^N / sqrt(N!) |0,0> with
/// c1 = sin(theta/2) e^{i phi}, c2 = cos(theta/2); its Bloch vector is
/// N (sin theta cos phi, sin theta sin phi, cos theta). Requires N <= cutoff.
Eigen::VectorXcd coherent_state(const TwoModeBasis& basis, int N, double theta, double phi);

/// Basis indices grouped by total particle number n1 + n2 (0..2*cutoff).
std::vector<std::vector<Index>> number_sectors(const TwoModeBasis& basis);

/// Largest |rho_ij| between states of different total particle number.
double number_coherence(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis);

/// Eigenvalues of a Hermitian matrix, ascending. Uses the number-sector
/// block structure when the off-block part vanishes.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m, const TwoModeBasis& basis);

/// D(a, b) = 1/2 ||a - b||_1.
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const TwoModeBasis& basis);

}  // namespace ptbec
