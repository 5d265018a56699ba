#include "eigenfed/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eigenfed/errors.hpp"

namespace eigenfed {

namespace {

constexpr double kSymmetryTol = 1e-10;

std::string shape_str(const Matrix &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::size_t rank_from_singular_values(const Vector &sv) {
  if (sv.size() == 0 || !(sv(0) > 0.0))
    return 0;
  const double cutoff = kRankTol * sv(0);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff)
      ++k;
  return k;
}

} // namespace

double orthonormality_defect(const Matrix &m) {
  const Matrix gram = m.transpose() * m;
  return (gram - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

SubspaceEstimate::SubspaceEstimate(Matrix basis, double tol)
    : basis_(std::move(basis)) {
  if (basis_.rows() < 1 || basis_.cols() < 1)
    throw DimensionMismatch("subspace basis must be non-empty");
  if (basis_.cols() > basis_.rows())
    throw DimensionMismatch("subspace basis " + shape_str(basis_) +
                            " has more columns than rows");
  if (!basis_.allFinite())
    throw NotOrthonormal("subspace basis has non-finite entries");
  const double defect = orthonormality_defect(basis_);
  if (!(defect <= tol))
    throw NotOrthonormal("basis columns not orthonormal (defect " +
                         std::to_string(defect) + ")");
}

SubspaceEstimate SubspaceEstimate::trusted(Matrix basis) {
  return SubspaceEstimate(std::move(basis), TrustedTag{});
}

OrthogonalTransform::OrthogonalTransform(Matrix m, double tol)
    : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw DimensionMismatch("orthogonal transform must be square");
  const double defect = orthonormality_defect(m_);
  if (!(defect <= tol))
    throw NotOrthonormal("transform is not orthogonal (defect " +
                         std::to_string(defect) + ")");
}

Vector singular_values(const Matrix &a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

std::size_t numerical_rank(const Matrix &a) {
  return rank_from_singular_values(singular_values(a));
}

void canonicalize_column_signs(Matrix &m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (m(best, j) < 0.0)
      m.col(j) = -m.col(j);
  }
}

QrResult qr_orthonormalize(const Matrix &a) {
  const Eigen::Index r = a.cols();
  if (a.rows() < 1 || r < 1 || r > a.rows())
    throw DimensionMismatch("qr_orthonormalize needs a tall d×r matrix, got " +
                            shape_str(a));
  const std::size_t rank = numerical_rank(a);
  if (rank < static_cast<std::size_t>(r))
    throw RankDeficient(rank, static_cast<std::size_t>(r));

  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), r);
  Matrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (rr(j, j) < 0.0) {
      q.col(j) = -q.col(j);
      rr.row(j) = -rr.row(j);
    }
  }
  return {SubspaceEstimate::trusted(std::move(q)), std::move(rr)};
}

SubspaceEstimate svd_orthonormalize(const Matrix &a) {
  const Eigen::Index r = a.cols();
  if (a.rows() < 1 || r < 1 || r > a.rows())
    throw DimensionMismatch("svd_orthonormalize needs a tall d×r matrix, got " +
                            shape_str(a));
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const std::size_t rank = rank_from_singular_values(svd.singularValues());
  if (rank < static_cast<std::size_t>(r))
    throw RankDeficient(rank, static_cast<std::size_t>(r));
  Matrix u = svd.matrixU().leftCols(r);
  canonicalize_column_signs(u);
  return SubspaceEstimate::trusted(std::move(u));
}

std::pair<Vector, Matrix> symmetric_eigen(const Matrix &s) {
  if (s.rows() != s.cols() || s.rows() < 1)
    throw DimensionMismatch("symmetric_eigen needs a square matrix, got " +
                            shape_str(s));
  if (!s.allFinite())
    throw NotSymmetric("matrix has non-finite entries");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw Error("symmetric eigensolver failed to converge");

  const Eigen::Index d = s.rows();
  // Eigen returns ascending order.
  Vector values = es.eigenvalues().reverse();
  Matrix vectors = es.eigenvectors().rowwise().reverse();

  const double norm2 = std::max(std::abs(values(0)), std::abs(values(d - 1)));
  const double asym = 0.5 * (s - s.transpose()).norm();
  if (asym > kSymmetryTol * norm2)
    throw NotSymmetric("asymmetry " + std::to_string(asym) +
                       " exceeds tolerance relative to norm " +
                       std::to_string(norm2));
  canonicalize_column_signs(vectors);
  return {std::move(values), std::move(vectors)};
}

EigenspaceResult top_eigenspace(const Matrix &s, Eigen::Index r) {
  if (r < 1 || r > s.rows())
    throw DimensionMismatch("requested " + std::to_string(r) +
                            " eigenvectors of a " + shape_str(s) + " matrix");
  auto [values, vectors] = symmetric_eigen(s);
  return {SubspaceEstimate::trusted(vectors.leftCols(r)), std::move(values)};
}

double symmetric_spectral_norm(const Matrix &s) {
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix &a) {
  if (a.size() == 0)
    return 0.0;
  return singular_values(a)(0);
}

OrthogonalTransform procrustes_rotation(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("procrustes_rotation: " + shape_str(a) + " vs " +
                            shape_str(b));
  const Matrix cross = a.transpose() * b;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix z = svd.matrixU() * svd.matrixV().transpose();
  // Products of orthogonal factors drift at the 1e-15 level; validate loosely.
  return OrthogonalTransform(std::move(z), 1e-9);
}

} // namespace eigenfed
