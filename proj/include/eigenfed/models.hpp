#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eigenfed/linalg.hpp"
#include "eigenfed/random.hpp"

namespace eigenfed {

enum class ModelKind { M1, M2, Custom };

/// Ground-truth spectrum X = U·diag(τ)·Uᵀ with U Haar-distributed.
struct SpectralModel {
  ModelKind kind = ModelKind::Custom;
  Eigen::Index d = 0;
  Eigen::Index r = 0;
  /// τ, descending, τ₁ = 1.
  Vector eigenvalues;
  Seed basis_seed = 0;
  /// Realized eigengap λ_r − λ_{r+1}.
  double delta = 0.0;
  /// Requested intrinsic dimension (M2 only).
  std::optional<double> r_star_target;

  /// Σ τ / τ₁ of the length-d spectrum.
  double realized_intdim() const;
};

struct RealizedModel {
  Matrix x;
  SubspaceEstimate v1;
};

/// One worker's data: its samples (if any) and its local symmetric matrix.
struct NodeDataset {
  std::uint32_t node_id = 0;
  std::optional<Matrix> samples;
  Matrix local_matrix;
  std::size_t n = 0;
};

/// Quadratic sensing instance y_i = ‖X♯ᵀ a_i‖² + noise_i.
struct SensingInstance {
  SubspaceEstimate x_sharp;
  Matrix designs;       // N×d, one design a_i per row
  Vector measurements;  // N
  double truncation_tau = 0.0;
};

/// Fixed set of k atoms on the sphere of radius √d.
struct DiscreteUniformModel {
  Matrix atoms;  // k×d
  /// (1/k)·Σ y_j y_jᵀ
  Matrix second_moment;
};

struct DiscreteUniformSample {
  Matrix samples;
  Matrix population_second_moment;
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

/// Haar-distributed d×d orthogonal matrix: QR of a seeded Gaussian matrix with
/// the columns of Q flipped so that diag(R) > 0.
Matrix haar_orthogonal(Eigen::Index d, Seed seed);

/// Haar-distributed d×r matrix with orthonormal columns.
SubspaceEstimate haar_stiefel(Eigen::Index d, Eigen::Index r, Seed seed);

/// Model M1: r leading eigenvalues linearly spaced from lambda_hi down to
/// lambda_lo, then (lambda_lo − delta)·0.9^{i−r−1}.
SpectralModel model_m1(Eigen::Index d, Eigen::Index r, double lambda_lo,
                       double lambda_hi, double delta, Seed basis_seed = 0);

/// Model M2: r unit eigenvalues, then (1 − delta)·α^{i−r} with
/// α = 1 − (1 − delta)/(r_star − r).
SpectralModel model_m2(Eigen::Index d, Eigen::Index r, double delta,
                       double r_star, Seed basis_seed = 0);

RealizedModel realize_matrix(const SpectralModel &model);

/// n i.i.d. rows from N(0, X), drawn as g·X^{1/2} with X^{1/2} from the
/// symmetric eigendecomposition. Throws NotPSD below an eigenvalue floor of
/// −1e-10.
Matrix sample_gaussian(const Matrix &x, std::size_t n, Seed seed);

/// Draws k atoms uniform on √d·S^{d−1}.
DiscreteUniformModel discrete_uniform_atoms(std::size_t k, Eigen::Index d,
                                            Seed seed);

/// n i.i.d. uniform picks among the model's atoms.
Matrix sample_atoms(const DiscreteUniformModel &model, std::size_t n, Seed seed);

/// Atoms and picks from one seed; returns the exact population second moment.
DiscreteUniformSample sample_discrete_uniform(std::size_t k, Eigen::Index d,
                                              std::size_t n, Seed seed);

/// (1/n)·SᵀS, exactly symmetric.
Matrix local_covariance(const Matrix &samples);

/// Seeded instance with Haar X♯, Gaussian designs and optional noise.
/// truncation_tau = tau_mult · mean(y).
SensingInstance sensing_instance(Eigen::Index d, Eigen::Index r, std::size_t n,
                                 double tau_mult, double noise_sd, Seed seed);

/// Instance from an explicit factor and designs (noise drawn from `seed`).
SensingInstance sensing_instance_from(SubspaceEstimate x_sharp, Matrix designs,
                                      double tau_mult, double noise_sd,
                                      Seed seed);

/// Truncated spectral surrogate (1/|S|)·Σ_{i∈S} T(y_i)·a_i a_iᵀ with
/// T(y) = y·1{y ≤ τ} over the measurement indices in `slice`.
Matrix sensing_surrogate(const SensingInstance &instance, IndexRange slice);

} // namespace eigenfed
