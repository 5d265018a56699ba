#include "eigenfed/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eigenfed/errors.hpp"

namespace eigenfed {

namespace {

constexpr double kPsdFloor = -1e-10;

void require(bool ok, const std::string &what) {
  if (!ok)
    throw InvalidModelParams(what);
}

} // namespace

double SpectralModel::realized_intdim() const {
  return eigenvalues.sum() / eigenvalues(0);
}

Matrix haar_orthogonal(Eigen::Index d, Seed seed) {
  if (d < 1)
    throw DimensionMismatch("haar_orthogonal needs d >= 1");
  Rng rng(seed);
  const Matrix g = rng.normal_matrix(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const auto &packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j)
    if (packed(j, j) < 0.0)
      q.col(j) = -q.col(j);
  return q;
}

SubspaceEstimate haar_stiefel(Eigen::Index d, Eigen::Index r, Seed seed) {
  if (r < 1 || r > d)
    throw DimensionMismatch("haar_stiefel needs 1 <= r <= d");
  Rng rng(seed);
  const Matrix g = rng.normal_matrix(d, r);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  const auto &packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < r; ++j)
    if (packed(j, j) < 0.0)
      q.col(j) = -q.col(j);
  return SubspaceEstimate(std::move(q), 1e-9);
}

SpectralModel model_m1(Eigen::Index d, Eigen::Index r, double lambda_lo,
                       double lambda_hi, double delta, Seed basis_seed) {
  require(r >= 1 && r < d, "M1 needs 1 <= r < d");
  require(delta > 0.0, "M1 needs delta > 0");
  require(delta < lambda_lo, "M1 needs delta < lambda_lo");
  require(lambda_lo <= lambda_hi, "M1 needs lambda_lo <= lambda_hi");
  require(lambda_hi == 1.0, "M1 is normalized to lambda_hi = 1");

  Vector tau(d);
  for (Eigen::Index i = 1; i <= d; ++i) {
    if (i <= r) {
      tau(i - 1) = r == 1 ? lambda_hi
                          : lambda_hi - (lambda_hi - lambda_lo) *
                                            static_cast<double>(i - 1) /
                                            static_cast<double>(r - 1);
    } else {
      tau(i - 1) = (lambda_lo - delta) * std::pow(0.9, static_cast<double>(i - r - 1));
    }
  }
  SpectralModel m;
  m.kind = ModelKind::M1;
  m.d = d;
  m.r = r;
  m.eigenvalues = std::move(tau);
  m.basis_seed = basis_seed;
  m.delta = m.eigenvalues(r - 1) - m.eigenvalues(r);
  return m;
}

SpectralModel model_m2(Eigen::Index d, Eigen::Index r, double delta,
                       double r_star, Seed basis_seed) {
  require(r >= 1 && r < d, "M2 needs 1 <= r < d");
  require(delta > 0.0 && delta < 1.0, "M2 needs 0 < delta < 1");
  require(r_star > static_cast<double>(r) + (1.0 - delta),
          "M2 needs r_star > r + (1 - delta)");
  const double alpha = 1.0 - (1.0 - delta) / (r_star - static_cast<double>(r));

  Vector tau(d);
  for (Eigen::Index i = 1; i <= d; ++i)
    tau(i - 1) = i <= r ? 1.0
                        : (1.0 - delta) * std::pow(alpha, static_cast<double>(i - r));

  SpectralModel m;
  m.kind = ModelKind::M2;
  m.d = d;
  m.r = r;
  m.eigenvalues = std::move(tau);
  m.basis_seed = basis_seed;
  m.delta = 1.0 - (1.0 - delta) * alpha;
  m.r_star_target = r_star;
  return m;
}

RealizedModel realize_matrix(const SpectralModel &model) {
  if (model.eigenvalues.size() != model.d || model.r < 1 || model.r > model.d)
    throw InvalidModelParams("spectral model has inconsistent dimensions");
  const Matrix u = haar_orthogonal(model.d, model.basis_seed);
  Matrix x = u * model.eigenvalues.asDiagonal() * u.transpose();
  x = 0.5 * (x + x.transpose()).eval();
  return {std::move(x), SubspaceEstimate(u.leftCols(model.r), 1e-9)};
}

Matrix sample_gaussian(const Matrix &x, std::size_t n, Seed seed) {
  auto [values, vectors] = symmetric_eigen(x);
  if (values(values.size() - 1) < kPsdFloor)
    throw NotPSD("covariance has eigenvalue " +
                 std::to_string(values(values.size() - 1)));
  const Vector root = values.cwiseMax(0.0).cwiseSqrt();
  const Matrix sqrt_x = vectors * root.asDiagonal() * vectors.transpose();
  Rng rng(seed);
  const Matrix g = rng.normal_matrix(static_cast<Eigen::Index>(n), x.rows());
  return g * sqrt_x;
}

DiscreteUniformModel discrete_uniform_atoms(std::size_t k, Eigen::Index d,
                                            Seed seed) {
  require(k >= 2, "discrete-uniform model needs k >= 2");
  require(d >= 1, "discrete-uniform model needs d >= 1");
  Rng rng(seed);
  Matrix atoms = rng.normal_matrix(static_cast<Eigen::Index>(k), d);
  const double radius = std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < atoms.rows(); ++j)
    atoms.row(j) *= radius / atoms.row(j).norm();
  Matrix second = atoms.transpose() * atoms / static_cast<double>(k);
  second = 0.5 * (second + second.transpose()).eval();
  return {std::move(atoms), std::move(second)};
}

Matrix sample_atoms(const DiscreteUniformModel &model, std::size_t n, Seed seed) {
  Rng rng(seed);
  const auto k = static_cast<std::uint64_t>(model.atoms.rows());
  Matrix out(static_cast<Eigen::Index>(n), model.atoms.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    out.row(i) = model.atoms.row(static_cast<Eigen::Index>(rng.index(k)));
  return out;
}

DiscreteUniformSample sample_discrete_uniform(std::size_t k, Eigen::Index d,
                                              std::size_t n, Seed seed) {
  auto model = discrete_uniform_atoms(k, d, derive_seed(seed, {0}));
  Matrix samples = sample_atoms(model, n, derive_seed(seed, {1}));
  return {std::move(samples), std::move(model.second_moment)};
}

Matrix local_covariance(const Matrix &samples) {
  if (samples.rows() < 1)
    throw DimensionMismatch("local_covariance needs at least one sample");
  Matrix cov = samples.transpose() * samples / static_cast<double>(samples.rows());
  return 0.5 * (cov + cov.transpose());
}

SensingInstance sensing_instance_from(SubspaceEstimate x_sharp, Matrix designs,
                                      double tau_mult, double noise_sd,
                                      Seed seed) {
  if (designs.cols() != x_sharp.dim_ambient())
    throw DimensionMismatch("designs must have d columns");
  if (designs.rows() < 1)
    throw InvalidModelParams("sensing instance needs N >= 1");
  if (!(tau_mult > 0.0))
    throw InvalidModelParams("tau_mult must be positive");
  if (!(noise_sd >= 0.0))
    throw InvalidModelParams("noise_sd must be non-negative");

  Vector y = (designs * x_sharp.basis()).rowwise().squaredNorm();
  if (noise_sd > 0.0) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y(i) += noise_sd * rng.normal();
  }
  const double tau = tau_mult * y.mean();
  return {std::move(x_sharp), std::move(designs), std::move(y), tau};
}

SensingInstance sensing_instance(Eigen::Index d, Eigen::Index r, std::size_t n,
                                 double tau_mult, double noise_sd, Seed seed) {
  auto x_sharp = haar_stiefel(d, r, derive_seed(seed, {0}));
  Rng rng(derive_seed(seed, {1}));
  Matrix designs = rng.normal_matrix(static_cast<Eigen::Index>(n), d);
  return sensing_instance_from(std::move(x_sharp), std::move(designs), tau_mult,
                               noise_sd, derive_seed(seed, {2}));
}

Matrix sensing_surrogate(const SensingInstance &instance, IndexRange slice) {
  const auto total = static_cast<std::size_t>(instance.measurements.size());
  if (slice.begin >= slice.end || slice.end > total)
    throw DimensionMismatch("sensing_surrogate: empty or out-of-range slice");
  const auto begin = static_cast<Eigen::Index>(slice.begin);
  const auto count = static_cast<Eigen::Index>(slice.size());

  // T(y) = y·1{y ≤ τ}, clipped at zero so the surrogate stays PSD under noise.
  Vector weights(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double y = instance.measurements(begin + i);
    weights(i) = (y <= instance.truncation_tau) ? std::max(y, 0.0) : 0.0;
  }
  const auto a = instance.designs.middleRows(begin, count);
  Matrix d = a.transpose() * weights.asDiagonal() * a / static_cast<double>(count);
  return 0.5 * (d + d.transpose());
}

} // namespace eigenfed
