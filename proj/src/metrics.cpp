#include "eigenfed/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "eigenfed/errors.hpp"

namespace eigenfed {

namespace {

// Receiver-side bases may carry slightly more drift than kernel outputs.
constexpr double kMetricOrthoTol = 1e-8;

void check_pair(const SubspaceEstimate &u, const SubspaceEstimate &v) {
  if (u.dim_ambient() != v.dim_ambient() || u.dim_subspace() != v.dim_subspace())
    throw DimensionMismatch("subspace distance needs equal shapes");
  if (orthonormality_defect(u.basis()) > kMetricOrthoTol ||
      orthonormality_defect(v.basis()) > kMetricOrthoTol)
    throw NotOrthonormal("subspace distance needs orthonormal bases");
}

Matrix residual(const SubspaceEstimate &u, const SubspaceEstimate &v) {
  return v.basis() - u.basis() * (u.basis().transpose() * v.basis());
}

void check_square_like(const Matrix &x, std::span<const Matrix> x_hats) {
  if (x.rows() != x.cols())
    throw DimensionMismatch("ground truth must be square");
  if (x_hats.empty())
    throw DimensionMismatch("need at least one local matrix");
  for (const auto &xh : x_hats)
    if (xh.rows() != x.rows() || xh.cols() != x.cols())
      throw DimensionMismatch("local matrix shape differs from ground truth");
}

} // namespace

double subspace_dist2(const SubspaceEstimate &u, const SubspaceEstimate &v) {
  check_pair(u, v);
  return std::clamp(spectral_norm(residual(u, v)), 0.0, 1.0);
}

double subspace_distF(const SubspaceEstimate &u, const SubspaceEstimate &v) {
  check_pair(u, v);
  return std::sqrt(2.0) * residual(u, v).norm();
}

double intdim(const Matrix &a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw DimensionMismatch("intdim needs a square matrix");
  const double top = symmetric_eigen(a).first(0);
  if (!(top > 0.0))
    throw ZeroMatrix("intdim of a zero (or negative) matrix");
  return a.trace() / top;
}

double bound_bounded_case(const BoundInputs &in) {
  if (!in.b)
    throw MissingBound("bounded-case rate needs the almost-sure bound b");
  const double b2 = *in.b * *in.b;
  const double d2 = in.delta * in.delta;
  const double first = std::sqrt(b2 * std::log(2.0 * in.d / in.p) / (d2 * in.m * in.n));
  const double second = b2 * std::log(2.0 * in.d * in.m / in.p) / (d2 * in.n);
  return first + second;
}

SubgaussianBound bound_subgaussian(const BoundInputs &in, double c1) {
  const double ratio = in.norm_x / in.delta;
  const double log_term = in.r_star + std::log(in.m / in.p);
  const double first = log_term / in.n * ratio * ratio;
  const double second =
      std::sqrt((in.r_star + std::log(c1 * in.n)) / (in.m * in.n)) * ratio;
  return {first + second, in.n >= log_term / (in.delta * in.delta)};
}

double bound_simplified(double r_star, double n, double m, double delta) {
  const double d2 = delta * delta;
  return (r_star + std::log(m)) / (d2 * n) +
         std::sqrt((r_star + 2.0 * std::log(n)) / (d2 * m * n));
}

AssumptionReport check_assumptions(const Matrix &x, std::span<const Matrix> x_hats,
                                   Eigen::Index r) {
  check_square_like(x, x_hats);
  if (r < 1 || r >= x.rows())
    throw DimensionMismatch("check_assumptions needs 1 <= r < d");
  const Vector values = symmetric_eigen(x).first;

  AssumptionReport rep;
  rep.delta = values(r - 1) - values(r);
  rep.eigengap_ok = rep.delta > 0.0;

  Matrix mean = Matrix::Zero(x.rows(), x.cols());
  for (const auto &xh : x_hats) {
    // NotSymmetric propagates from the decomposition of each local matrix.
    symmetric_eigen(xh);
    rep.max_local_error = std::max(rep.max_local_error, symmetric_spectral_norm(xh - x));
    mean += xh;
  }
  mean /= static_cast<double>(x_hats.size());
  rep.mean_error = symmetric_spectral_norm(mean - x);
  rep.local_error_ok = rep.max_local_error < rep.delta / 8.0;
  return rep;
}

double deterministic_bound_rhs(const Matrix &x, std::span<const Matrix> x_hats,
                               double delta) {
  check_square_like(x, x_hats);
  if (!(delta > 0.0))
    throw Error("deterministic bound needs delta > 0");
  double max_err = 0.0;
  Matrix mean = Matrix::Zero(x.rows(), x.cols());
  for (const auto &xh : x_hats) {
    max_err = std::max(max_err, symmetric_spectral_norm(xh - x));
    mean += xh;
  }
  mean /= static_cast<double>(x_hats.size());
  const double mean_err = symmetric_spectral_norm(mean - x);
  return max_err * max_err / (delta * delta) + mean_err / delta;
}

} // namespace eigenfed
