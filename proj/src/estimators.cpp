#include "eigenfed/estimators.hpp"

#include <cmath>
#include <string>

#include "eigenfed/errors.hpp"

namespace eigenfed {

namespace {

void check_solutions(std::span<const LocalSolution> solutions) {
  if (solutions.empty())
    throw DimensionMismatch("aggregation needs at least one local solution");
  const auto d = solutions.front().estimate.dim_ambient();
  const auto r = solutions.front().estimate.dim_subspace();
  for (const auto &s : solutions)
    if (s.estimate.dim_ambient() != d || s.estimate.dim_subspace() != r)
      throw DimensionMismatch("local solutions have inconsistent shapes (node " +
                              std::to_string(s.node_id) + ")");
}

double sigma_min(const Matrix &a) {
  const Vector sv = singular_values(a);
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

} // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
  case Method::Local: return "local";
  case Method::Central: return "central";
  case Method::Naive: return "naive";
  case Method::SignFix: return "sign_fix";
  case Method::Procrustes: return "procrustes";
  case Method::Iterative: return "iterative";
  case Method::ProjectorAverage: return "projector_avg";
  }
  return "unknown";
}

const SubspaceEstimate &AggregateSolution::subspace() const {
  if (!estimate)
    throw Error(std::string(method_name(method)) +
                ": aggregate is degenerate (sigma_min " +
                std::to_string(pre_qr_sigma_min) + ")");
  return *estimate;
}

LocalSolution solve_local(const Matrix &x_hat, Eigen::Index r,
                          std::uint32_t node_id) {
  return {node_id, top_eigenspace(x_hat, r).vectors, std::nullopt};
}

Matrix align_to_reference(const SubspaceEstimate &local,
                          const SubspaceEstimate &reference) {
  const auto z = procrustes_rotation(local, reference);
  return local.basis() * z.matrix();
}

AggregateSolution orthonormalize_average(const Matrix &average, Method method,
                                         std::size_t rounds_used) {
  AggregateSolution out;
  out.method = method;
  out.rounds_used = rounds_used;
  out.pre_qr_sigma_min = sigma_min(average);
  try {
    out.estimate = qr_orthonormalize(average).q;
  } catch (const RankDeficient &) {
    try {
      out.estimate = svd_orthonormalize(average);
    } catch (const RankDeficient &) {
      out.estimate.reset();
    }
  }
  return out;
}

AggregateSolution naive_average(std::span<const LocalSolution> solutions) {
  check_solutions(solutions);
  Matrix sum = Matrix::Zero(solutions.front().estimate.dim_ambient(),
                            solutions.front().estimate.dim_subspace());
  for (const auto &s : solutions)
    sum += s.estimate.basis();
  const Matrix average = sum / static_cast<double>(solutions.size());

  AggregateSolution out;
  out.method = Method::Naive;
  out.pre_qr_sigma_min = sigma_min(average);
  try {
    out.estimate = qr_orthonormalize(average).q;
  } catch (const RankDeficient &) {
    out.estimate.reset();
  }
  return out;
}

AggregateSolution sign_fix_average(std::span<const LocalSolution> solutions,
                                   std::size_t reference_index) {
  check_solutions(solutions);
  if (solutions.front().estimate.dim_subspace() != 1)
    throw ShapeError("sign-fixed averaging requires r = 1");
  if (reference_index >= solutions.size())
    throw DimensionMismatch("reference index out of range");

  const Matrix &ref = solutions[reference_index].estimate.basis();
  Matrix sum = Matrix::Zero(ref.rows(), 1);
  for (const auto &s : solutions) {
    const double ip = s.estimate.basis().col(0).dot(ref.col(0));
    sum += (ip < 0.0 ? -1.0 : 1.0) * s.estimate.basis();
  }
  const Matrix average = sum / static_cast<double>(solutions.size());

  AggregateSolution out;
  out.method = Method::SignFix;
  const double norm = average.norm();
  out.pre_qr_sigma_min = norm;
  if (norm > 0.0 && std::isfinite(norm))
    out.estimate = SubspaceEstimate::trusted(average / norm);
  return out;
}

AggregateSolution
procrustes_fix_average(std::span<const LocalSolution> solutions,
                       const std::optional<SubspaceEstimate> &reference) {
  check_solutions(solutions);
  const SubspaceEstimate &ref = reference ? *reference : solutions.front().estimate;
  if (ref.dim_ambient() != solutions.front().estimate.dim_ambient() ||
      ref.dim_subspace() != solutions.front().estimate.dim_subspace())
    throw DimensionMismatch("reference shape differs from local solutions");

  Matrix sum = Matrix::Zero(ref.dim_ambient(), ref.dim_subspace());
  for (const auto &s : solutions)
    sum += align_to_reference(s.estimate, ref);
  return orthonormalize_average(sum / static_cast<double>(solutions.size()),
                                Method::Procrustes);
}

AggregateSolution iterative_refinement(std::span<const LocalSolution> solutions,
                                       std::size_t n_iter) {
  if (n_iter < 1)
    throw Error("iterative_refinement needs n_iter >= 1");
  check_solutions(solutions);
  SubspaceEstimate reference = solutions.front().estimate;
  AggregateSolution current;
  for (std::size_t k = 1; k <= n_iter; ++k) {
    current = procrustes_fix_average(solutions, reference);
    if (current.degenerate())
      break;
    reference = *current.estimate;
  }
  current.method = Method::Iterative;
  current.rounds_used = n_iter;
  return current;
}

AggregateSolution projector_average(std::span<const LocalSolution> solutions) {
  check_solutions(solutions);
  const auto d = solutions.front().estimate.dim_ambient();
  const auto r = solutions.front().estimate.dim_subspace();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto &s : solutions)
    sum.noalias() += s.estimate.basis() * s.estimate.basis().transpose();
  const Matrix average = sum / static_cast<double>(solutions.size());

  auto eig = top_eigenspace(average, r);
  AggregateSolution out;
  out.method = Method::ProjectorAverage;
  // The average projector has eigenvalues in [0, 1]; λ_r stands in for σ_min.
  out.pre_qr_sigma_min = std::max(0.0, eig.eigenvalues(r - 1));
  out.estimate = std::move(eig.vectors);
  return out;
}

AggregateSolution central_estimator(std::span<const NodeDataset> datasets,
                                    Eigen::Index r) {
  if (datasets.empty())
    throw DimensionMismatch("central estimator needs at least one dataset");
  const auto &first = datasets.front().local_matrix;
  Matrix sum = Matrix::Zero(first.rows(), first.cols());
  for (const auto &ds : datasets) {
    if (ds.local_matrix.rows() != first.rows() || ds.local_matrix.cols() != first.cols())
      throw DimensionMismatch("local matrices have inconsistent shapes");
    sum += ds.local_matrix;
  }
  auto eig = top_eigenspace(sum / static_cast<double>(datasets.size()), r);
  AggregateSolution out;
  out.method = Method::Central;
  out.pre_qr_sigma_min = 1.0;
  out.estimate = std::move(eig.vectors);
  return out;
}

Matrix generic_align_average(std::span<const Matrix> factors,
                             std::size_t reference_index) {
  if (factors.empty())
    throw DimensionMismatch("generic_align_average needs at least one factor");
  if (reference_index >= factors.size())
    throw DimensionMismatch("reference index out of range");
  const Matrix &ref = factors[reference_index];
  Matrix sum = Matrix::Zero(ref.rows(), ref.cols());
  for (const auto &f : factors) {
    if (f.rows() != ref.rows() || f.cols() != ref.cols())
      throw DimensionMismatch("factors have inconsistent shapes");
    sum += f * procrustes_rotation(f, ref).matrix();
  }
  return sum / static_cast<double>(factors.size());
}

} // namespace eigenfed
