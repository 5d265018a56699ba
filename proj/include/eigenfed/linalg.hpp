#pragma once

#include <cstddef>
#include <utility>

#include <Eigen/Dense>

namespace eigenfed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance on ‖BᵀB − I‖ used to accept a basis produced by the kernels.
inline constexpr double kOrthonormalTol = 1e-10;
/// Relative singular-value cutoff defining numerical rank.
inline constexpr double kRankTol = 1e-12;

/// Largest entry of |MᵀM − I|. Zero for an exactly orthonormal M.
double orthonormality_defect(const Matrix &m);

/// A d×r matrix with orthonormal columns spanning an r-dimensional subspace.
class SubspaceEstimate {
public:
  /// Validates column orthonormality to `tol`; throws NotOrthonormal.
  explicit SubspaceEstimate(Matrix basis, double tol = kOrthonormalTol);

  /// Wraps a basis the caller already knows to be orthonormal.
  static SubspaceEstimate trusted(Matrix basis);

  const Matrix &basis() const noexcept { return basis_; }
  Eigen::Index dim_ambient() const noexcept { return basis_.rows(); }
  Eigen::Index dim_subspace() const noexcept { return basis_.cols(); }

private:
  struct TrustedTag {};
  SubspaceEstimate(Matrix basis, TrustedTag) : basis_(std::move(basis)) {}

  Matrix basis_;
};

/// An r×r orthogonal matrix (determinant ±1).
class OrthogonalTransform {
public:
  explicit OrthogonalTransform(Matrix m, double tol = kOrthonormalTol);

  const Matrix &matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

private:
  Matrix m_;
};

struct QrResult {
  SubspaceEstimate q;
  Matrix r;
};

struct EigenspaceResult {
  SubspaceEstimate vectors;
  /// All d eigenvalues, algebraically descending.
  Vector eigenvalues;
};

/// Numerical rank of `a` with relative cutoff kRankTol·σ_max.
std::size_t numerical_rank(const Matrix &a);

/// Singular values of `a`, descending.
Vector singular_values(const Matrix &a);

/// Thin QR with positive R diagonal. Throws RankDeficient when the numerical
/// rank of `a` is below its column count.
QrResult qr_orthonormalize(const Matrix &a);

/// Leading left singular vectors of `a` (one per column). Each column's
/// largest-magnitude entry is made positive. Throws RankDeficient.
SubspaceEstimate svd_orthonormalize(const Matrix &a);

/// Top-r eigenpairs of a symmetric matrix.
///
/// The input is symmetrized as (S + Sᵀ)/2 before decomposition; inputs whose
/// antisymmetric part exceeds 1e-10·‖S‖₂ are rejected with NotSymmetric.
/// Eigenvector signs are fixed so that each column's largest-magnitude entry
/// is positive, ties going to the lowest index.
EigenspaceResult top_eigenspace(const Matrix &s, Eigen::Index r);

/// Full symmetric eigendecomposition, eigenvalues descending, same sign
/// convention as top_eigenspace.
std::pair<Vector, Matrix> symmetric_eigen(const Matrix &s);

/// Spectral norm of a symmetric matrix, max |λ|.
double symmetric_spectral_norm(const Matrix &s);

/// Spectral norm of an arbitrary matrix.
double spectral_norm(const Matrix &a);

/// Orthogonal Z minimizing ‖A·Z − B‖_F, from the full SVD AᵀB = P·Σ·Qᵀ as
/// Z = P·Qᵀ. Accepts any equal-shape pair; columns need not be orthonormal.
OrthogonalTransform procrustes_rotation(const Matrix &a, const Matrix &b);

inline OrthogonalTransform procrustes_rotation(const SubspaceEstimate &a,
                                               const SubspaceEstimate &b) {
  return procrustes_rotation(a.basis(), b.basis());
}

/// Flips column signs so each column's largest-magnitude entry is positive.
void canonicalize_column_signs(Matrix &m);

} // namespace eigenfed
