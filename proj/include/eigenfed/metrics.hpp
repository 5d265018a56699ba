#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "eigenfed/linalg.hpp"

namespace eigenfed {

/// ‖UUᵀ − VVᵀ‖₂, the sine of the largest principal angle. Computed as
/// σ_max((I − UUᵀ)V), which avoids forming d×d projectors.
double subspace_dist2(const SubspaceEstimate &u, const SubspaceEstimate &v);

/// ‖UUᵀ − VVᵀ‖_F = √2·‖(I − UUᵀ)V‖_F for equal-rank orthonormal bases.
double subspace_distF(const SubspaceEstimate &u, const SubspaceEstimate &v);

/// trace(A)/λ_max(A) for a PSD matrix. Throws ZeroMatrix.
double intdim(const Matrix &a);

/// Parameters of the high-probability rates. Logarithms are natural.
struct BoundInputs {
  double delta = 0.0;
  double m = 1.0;
  double n = 1.0;
  double d = 1.0;
  double r_star = 1.0;
  double p = 0.1;
  std::optional<double> b;
  double norm_x = 1.0;
};

/// √(b²·log(2d/p)/(δ²mn)) + b²·log(2dm/p)/(δ²n). Throws MissingBound when b
/// is absent. No hidden constant is applied.
double bound_bounded_case(const BoundInputs &in);

struct SubgaussianBound {
  double value = 0.0;
  /// Whether n ≥ (r★ + log(m/p))/δ², the sample-size requirement of the rate.
  bool precondition_met = false;
};

/// (r★ + log(m/p))/n·(‖X‖₂/δ)² + √((r★ + log(c₁n))/(mn))·‖X‖₂/δ.
SubgaussianBound bound_subgaussian(const BoundInputs &in, double c1 = 2.0);

/// f(r★, n) = (r★ + log m)/(δ²n) + √((r★ + 2·log n)/(δ²mn)).
double bound_simplified(double r_star, double n, double m, double delta);

struct AssumptionReport {
  double delta = 0.0;
  bool eigengap_ok = false;
  /// maxᵢ ‖X̂ⁱ − X‖₂
  double max_local_error = 0.0;
  /// max_local_error < δ/8
  bool local_error_ok = false;
  /// ‖(1/m)·Σ X̂ⁱ − X‖₂
  double mean_error = 0.0;

  bool all_ok() const noexcept { return eigengap_ok && local_error_ok; }
};

/// Eigengap of X at rank r and the local/mean perturbation sizes.
AssumptionReport check_assumptions(const Matrix &x, std::span<const Matrix> x_hats,
                                   Eigen::Index r);

/// δ⁻²·maxᵢ‖X̂ⁱ − X‖₂² + δ⁻¹·‖(1/m)·Σ X̂ⁱ − X‖₂.
double deterministic_bound_rhs(const Matrix &x, std::span<const Matrix> x_hats,
                               double delta);

} // namespace eigenfed
