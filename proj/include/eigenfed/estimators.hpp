#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "eigenfed/linalg.hpp"
#include "eigenfed/models.hpp"

namespace eigenfed {

enum class Method {
  Local,
  Central,
  Naive,
  SignFix,
  Procrustes,
  Iterative,
  ProjectorAverage,
};

std::string_view method_name(Method m) noexcept;

/// A worker's leading-subspace estimate.
struct LocalSolution {
  std::uint32_t node_id = 0;
  SubspaceEstimate estimate;
  /// ‖X̂ⁱ − X‖₂ when the ground truth is known.
  std::optional<double> local_error_norm;
};

struct AggregateSolution {
  /// Empty when the average collapsed below numerical rank r.
  std::optional<SubspaceEstimate> estimate;
  Method method = Method::Local;
  /// σ_min of the pre-orthonormalization average.
  double pre_qr_sigma_min = 0.0;
  std::size_t rounds_used = 1;

  bool degenerate() const noexcept { return !estimate.has_value(); }
  /// Returns the estimate or throws RankDeficient-derived Error.
  const SubspaceEstimate &subspace() const;
};

LocalSolution solve_local(const Matrix &x_hat, Eigen::Index r,
                          std::uint32_t node_id = 0);

/// Ṽ⁽ⁱ⁾ = V̂⁽ⁱ⁾·Z with Z the Procrustes solution against `reference`.
Matrix align_to_reference(const SubspaceEstimate &local,
                          const SubspaceEstimate &reference);

/// Orthonormalizes an average of aligned bases: QR first, SVD on
/// RankDeficient, degenerate result when both fail.
AggregateSolution orthonormalize_average(const Matrix &average, Method method,
                                         std::size_t rounds_used = 1);

/// V̄ = (1/m)·Σ V̂⁽ⁱ⁾ then QR, with no alignment.
AggregateSolution naive_average(std::span<const LocalSolution> solutions);

/// r = 1 only. Each v̂⁽ⁱ⁾ is flipped to agree in sign with the reference
/// solution (sign(0) = +1), averaged, and normalized.
AggregateSolution sign_fix_average(std::span<const LocalSolution> solutions,
                                   std::size_t reference_index = 0);

/// Procrustes fixing against `reference`, or solutions[0] when omitted.
AggregateSolution
procrustes_fix_average(std::span<const LocalSolution> solutions,
                       const std::optional<SubspaceEstimate> &reference = std::nullopt);

/// Repeats Procrustes fixing n_iter times, each round using the previous
/// round's output as reference, starting from solutions[0].
AggregateSolution iterative_refinement(std::span<const LocalSolution> solutions,
                                       std::size_t n_iter);

/// Top-r eigenspace of (1/m)·Σ V̂⁽ⁱ⁾V̂⁽ⁱ⁾ᵀ.
AggregateSolution projector_average(std::span<const LocalSolution> solutions);

/// Top-r eigenspace of the pooled matrix (1/m)·Σ X̂ⁱ.
AggregateSolution central_estimator(std::span<const NodeDataset> datasets,
                                    Eigen::Index r);

/// Aligns arbitrary p×q factors to factors[reference_index] by orthogonal
/// Procrustes and averages them. The result is not orthonormalized.
Matrix generic_align_average(std::span<const Matrix> factors,
                             std::size_t reference_index = 0);

} // namespace eigenfed
