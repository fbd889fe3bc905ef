#include "ptbec/fock.hpp"

#include "ptbec/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace ptbec {

namespace {

constexpr double kReportFloor = -1e-8;

double clip_reported(double p) { return (p < 0.0 && p > kReportFloor) ? 0.0 : p; }

SparseMatrix from_triplets(Index dim, const std::vector<Eigen::Triplet<cplx>>& t) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

TwoModeBasis::TwoModeBasis(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1) {
    throw InvalidArgument("cutoff must be >= 1 (got " + std::to_string(cutoff) + ")");
  }
}

Index TwoModeBasis::index(int n1, int n2) const {
  if (n1 < 0 || n2 < 0 || n1 > cutoff_ || n2 > cutoff_) {
    throw InvalidArgument("occupation (" + std::to_string(n1) + "," + std::to_string(n2) +
                          ") outside basis with cutoff " + std::to_string(cutoff_));
  }
  return static_cast<Index>(n1) * levels() + n2;
}

std::pair<int, int> TwoModeBasis::occupation(Index i) const {
  return {static_cast<int>(i / levels()), static_cast<int>(i % levels())};
}

bool TwoModeBasis::on_boundary(Index i) const {
  auto [n1, n2] = occupation(i);
  return n1 == cutoff_ || n2 == cutoff_;
}

TwoModeBasis build_basis(int cutoff) { return TwoModeBasis(cutoff); }

SparseOperator::SparseOperator(SparseMatrix m) : m_(std::move(m)) { m_.makeCompressed(); }

SparseOperator SparseOperator::adjoint() const { return SparseOperator(SparseMatrix(m_.adjoint())); }

SparseOperator SparseOperator::operator*(const SparseOperator& rhs) const {
  return SparseOperator(SparseMatrix((m_ * rhs.m_).pruned()));
}

SparseOperator SparseOperator::operator+(const SparseOperator& rhs) const {
  return SparseOperator(SparseMatrix(m_ + rhs.m_));
}

SparseOperator SparseOperator::operator-(const SparseOperator& rhs) const {
  return SparseOperator(SparseMatrix(m_ - rhs.m_));
}

SparseOperator SparseOperator::operator*(cplx s) const { return SparseOperator(SparseMatrix(m_ * s)); }

SparseOperator mode_operator(const TwoModeBasis& basis, Site site, Ladder kind) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(basis.dim()));
  for (Index i = 0; i < basis.dim(); ++i) {
    auto [n1, n2] = basis.occupation(i);
    const int n = site == Site::One ? n1 : n2;
    switch (kind) {
      case Ladder::Number:
        if (n > 0) t.emplace_back(i, i, static_cast<double>(n));
        break;
      case Ladder::Annihilate:
        if (n > 0) {
          const Index j = site == Site::One ? basis.index(n1 - 1, n2) : basis.index(n1, n2 - 1);
          t.emplace_back(j, i, std::sqrt(static_cast<double>(n)));
        }
        break;
      case Ladder::Create:
        if (n < basis.cutoff()) {
          const Index j = site == Site::One ? basis.index(n1 + 1, n2) : basis.index(n1, n2 + 1);
          t.emplace_back(j, i, std::sqrt(static_cast<double>(n + 1)));
        }
        break;
    }
  }
  return SparseOperator(from_triplets(basis.dim(), t));
}

SparseOperator hamiltonian(const TwoModeBasis& basis, double J, double U) {
  const auto a1 = mode_operator(basis, Site::One, Ladder::Annihilate);
  const auto a2 = mode_operator(basis, Site::Two, Ladder::Annihilate);
  const auto c1 = mode_operator(basis, Site::One, Ladder::Create);
  const auto c2 = mode_operator(basis, Site::Two, Ladder::Create);
  SparseOperator hop = c1 * a2 + c2 * a1;
  SparseOperator pair = c1 * c1 * a1 * a1 + c2 * c2 * a2 * a2;
  return hop * cplx(-J) + pair * cplx(0.5 * U);
}

BlochOperators bloch_operators(const TwoModeBasis& basis) {
  const auto a1 = mode_operator(basis, Site::One, Ladder::Annihilate);
  const auto a2 = mode_operator(basis, Site::Two, Ladder::Annihilate);
  const auto c1 = mode_operator(basis, Site::One, Ladder::Create);
  const auto c2 = mode_operator(basis, Site::Two, Ladder::Create);
  const auto n1 = mode_operator(basis, Site::One, Ladder::Number);
  const auto n2 = mode_operator(basis, Site::Two, Ladder::Number);
  const auto e12 = c1 * a2;
  const auto e21 = c2 * a1;
  BlochOperators b;
  b.ops[0] = (e12 + e21) * cplx(0.5);
  b.ops[1] = (e12 - e21) * cplx(0.0, 0.5);
  b.ops[2] = (n2 - n1) * cplx(0.5);
  b.ops[3] = n1 + n2;
  return b;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw InvalidArgument("density matrix must be square and non-empty");
  }
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
  const double tr = trace();
  if (!(std::abs(tr - 1.0) < kTraceTolerance)) {
    throw InvalidArgument("density matrix trace " + std::to_string(tr) + " differs from 1");
  }
  const double floor = m_.diagonal().real().minCoeff();
  if (floor < kDiagonalFloor) {
    throw InvalidArgument("density matrix has diagonal entry " + std::to_string(floor));
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm2 = psi.squaredNorm();
  if (norm2 <= 0.0) throw InvalidArgument("cannot build a pure state from the zero vector");
  return DensityMatrix(psi * psi.adjoint() / norm2);
}

DensityMatrix DensityMatrix::basis_state(const TwoModeBasis& basis, int n1, int n2) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim());
  psi(basis.index(n1, n2)) = 1.0;
  return pure(psi);
}

cplx expectation(const Eigen::MatrixXcd& rho, const SparseOperator& op) {
  cplx sum = 0.0;
  const SparseMatrix& a = op.matrix();
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      sum += it.value() * rho(it.col(), it.row());
    }
  }
  return sum;
}

MomentEvaluator::MomentEvaluator(const TwoModeBasis& basis)
    : basis_(basis), ops_(bloch_operators(basis)) {
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) {
      products_[j][k] = ops_[j] * ops_[k];
    }
  }
}

BlochMoments MomentEvaluator::operator()(const Eigen::MatrixXcd& rho) const {
  std::array<double, 4> mean{};
  for (int j = 0; j < 4; ++j) mean[j] = expectation(rho, ops_[j]).real();
  BlochMoments m;
  m.sx = 2.0 * mean[0];
  m.sy = 2.0 * mean[1];
  m.sz = 2.0 * mean[2];
  m.n = mean[3];
  for (int j = 0; j < 4; ++j) {
    for (int k = j; k < 4; ++k) {
      const double sym = (expectation(rho, products_[j][k]) + expectation(rho, products_[k][j])).real();
      m.delta(j, k) = m.delta(k, j) = sym - 2.0 * mean[j] * mean[k];
    }
  }
  return m;
}

BlochMoments bloch_moments(const DensityMatrix& rho, const TwoModeBasis& basis) {
  return MomentEvaluator(basis)(rho.matrix());
}

double purity(const FirstMoments& m) {
  if (!(m.n > 0.0)) {
    throw DegenerateStateError("purity undefined for particle number " + std::to_string(m.n));
  }
  return (m.sx * m.sx + m.sy * m.sy + m.sz * m.sz) / (m.n * m.n);
}

std::vector<double> site_distribution(const DensityMatrix& rho, const TwoModeBasis& basis, Site site) {
  std::vector<double> p(static_cast<std::size_t>(basis.levels()), 0.0);
  for (Index i = 0; i < basis.dim(); ++i) {
    auto [n1, n2] = basis.occupation(i);
    p[static_cast<std::size_t>(site == Site::One ? n1 : n2)] += rho(i, i).real();
  }
  std::transform(p.begin(), p.end(), p.begin(), clip_reported);
  return p;
}

std::vector<double> total_number_distribution(const DensityMatrix& rho, const TwoModeBasis& basis) {
  std::vector<double> q(static_cast<std::size_t>(2 * basis.cutoff() + 1), 0.0);
  for (Index i = 0; i < basis.dim(); ++i) {
    q[static_cast<std::size_t>(basis.total(i))] += rho(i, i).real();
  }
  std::transform(q.begin(), q.end(), q.begin(), clip_reported);
  return q;
}

SingleParticleDM single_particle_dm(const Eigen::Matrix2cd& sigma) {
  SingleParticleDM out;
  out.sigma = sigma;
  out.n = sigma.trace().real();
  if (!(out.n > 0.0)) {
    throw DegenerateStateError("single-particle density matrix of an empty state");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(sigma);
  out.eigenvalues << es.eigenvalues()(1), es.eigenvalues()(0);
  out.eigenvectors.col(0) = es.eigenvectors().col(1);
  out.eigenvectors.col(1) = es.eigenvectors().col(0);
  return out;
}

SingleParticleDM single_particle_dm(const DensityMatrix& rho, const TwoModeBasis& basis) {
  const auto a1 = mode_operator(basis, Site::One, Ladder::Annihilate);
  const auto n1 = mode_operator(basis, Site::One, Ladder::Number);
  const auto n2 = mode_operator(basis, Site::Two, Ladder::Number);
  const auto e21 = mode_operator(basis, Site::Two, Ladder::Create) * a1;  // a2^dag a1
  Eigen::Matrix2cd sigma;
  sigma(0, 0) = expectation(rho.matrix(), n1);
  sigma(1, 1) = expectation(rho.matrix(), n2);
  sigma(0, 1) = expectation(rho.matrix(), e21);
  sigma(1, 0) = std::conj(sigma(0, 1));
  return single_particle_dm(sigma);
}

double truncation_mass(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis) {
  double mass = 0.0;
  for (Index i = 0; i < basis.dim(); ++i) {
    if (basis.on_boundary(i)) mass += rho(i, i).real();
  }
  return mass;
}

double truncation_mass(const DensityMatrix& rho, const TwoModeBasis& basis) {
  return truncation_mass(rho.matrix(), basis);
}

Eigen::VectorXcd coherent_state(const TwoModeBasis& basis, int N, double theta, double phi) {
  if (N < 0 || N > basis.cutoff()) {
    throw InvalidArgument("coherent state with N=" + std::to_string(N) + " does not fit cutoff " +
                          std::to_string(basis.cutoff()));
  }
  const cplx c1 = std::polar(std::sin(0.5 * theta), phi);
  const double c2 = std::cos(0.5 * theta);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim());
  // sqrt(binom(N,k)) c1^k c2^(N-k), accumulated in log space for the binomial.
  for (int k = 0; k <= N; ++k) {
    const double log_binom = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
    psi(basis.index(k, N - k)) =
        std::exp(0.5 * log_binom) * std::pow(c1, k) * std::pow(c2, N - k);
  }
  return psi;
}

std::vector<std::vector<Index>> number_sectors(const TwoModeBasis& basis) {
  std::vector<std::vector<Index>> sectors(static_cast<std::size_t>(2 * basis.cutoff() + 1));
  for (Index i = 0; i < basis.dim(); ++i) sectors[static_cast<std::size_t>(basis.total(i))].push_back(i);
  return sectors;
}

double number_coherence(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis) {
  double worst = 0.0;
  for (Index c = 0; c < rho.cols(); ++c) {
    const int nc = basis.total(c);
    for (Index r = 0; r < rho.rows(); ++r) {
      if (basis.total(r) != nc) worst = std::max(worst, std::abs(rho(r, c)));
    }
  }
  return worst;
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m, const TwoModeBasis& basis) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (number_coherence(m, basis) > 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(m.rows()));
  for (const auto& sector : number_sectors(basis)) {
    const auto n = static_cast<Index>(sector.size());
    Eigen::MatrixXcd block(n, n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) block(a, b) = m(sector[a], sector[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
    for (Index a = 0; a < n; ++a) all.push_back(es.eigenvalues()(a));
  }
  std::sort(all.begin(), all.end());
  return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Index>(all.size()));
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const TwoModeBasis& basis) {
  Eigen::MatrixXcd d = a - b;
  d = (0.5 * (d + d.adjoint())).eval();
  return 0.5 * hermitian_eigenvalues(d, basis).cwiseAbs().sum();
}

}  // namespace ptbec
