#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "eigenfed/errors.hpp"
#include "eigenfed/metrics.hpp"
#include "eigenfed/models.hpp"

using namespace eigenfed;

namespace {

SubspaceEstimate col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v)
    m(i++, 0) = x;
  return SubspaceEstimate(m);
}

// ‖UUᵀ − VVᵀ‖₂ formed explicitly, as an independent check of the residual form.
double projector_gap(const SubspaceEstimate &u, const SubspaceEstimate &v) {
  const Matrix pu = u.basis() * u.basis().transpose();
  const Matrix pv = v.basis() * v.basis().transpose();
  return spectral_norm(pu - pv);
}

} // namespace

TEST(Dist2, OrthogonalAndFortyFive) {
  EXPECT_NEAR(subspace_dist2(col({1, 0}), col({0, 1})), 1.0, 1e-15);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(subspace_dist2(col({1, 0}), col({h, h})), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(subspace_dist2(col({1, 0}), col({-1, 0})), 0.0, 1e-15);
}

TEST(Dist2, MatchesProjectorDifferenceAndSymmetric) {
  for (Seed s = 0; s < 20; ++s) {
    const SubspaceEstimate u = haar_stiefel(9, 3, derive_seed(s, {0}));
    const SubspaceEstimate v = haar_stiefel(9, 3, derive_seed(s, {1}));
    EXPECT_NEAR(subspace_dist2(u, v), projector_gap(u, v), 1e-12);
    EXPECT_NEAR(subspace_dist2(u, v), subspace_dist2(v, u), 1e-12);
  }
}

TEST(Dist2, Errors) {
  EXPECT_THROW(subspace_dist2(col({1, 0}), col({1, 0, 0})), DimensionMismatch);
  const SubspaceEstimate drift = SubspaceEstimate::trusted(Matrix::Constant(2, 1, 1.0));
  EXPECT_THROW(subspace_dist2(col({1, 0}), drift), NotOrthonormal);
}

TEST(DistF, OrthogonalAndNormSandwich) {
  EXPECT_NEAR(subspace_distF(col({1, 0}), col({0, 1})), std::sqrt(2.0), 1e-15);
  for (Seed s = 0; s < 20; ++s) {
    const SubspaceEstimate u = haar_stiefel(8, 3, derive_seed(s, {2}));
    const SubspaceEstimate v = haar_stiefel(8, 3, derive_seed(s, {3}));
    const double d2 = subspace_dist2(u, v), df = subspace_distF(u, v);
    EXPECT_LE(d2, df + 1e-12);
    EXPECT_LE(df, std::sqrt(6.0) * d2 + 1e-12);
    const Matrix diff = u.basis() * u.basis().transpose() - v.basis() * v.basis().transpose();
    EXPECT_NEAR(df, diff.norm(), 1e-12);
  }
}

TEST(Intdim, Examples) {
  EXPECT_DOUBLE_EQ(intdim(Matrix::Identity(5, 5)), 5.0);
  EXPECT_DOUBLE_EQ(intdim(Eigen::Vector2d(1.0, 0.5).asDiagonal().toDenseMatrix()), 1.5);
  Matrix spike = Matrix::Zero(4, 4);
  spike(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(intdim(spike), 1.0);
  EXPECT_THROW(intdim(Matrix::Zero(3, 3)), ZeroMatrix);
}

TEST(Intdim, ModelRealizedValueAgrees) {
  const SpectralModel m = model_m2(50, 3, 0.2, 10.0, 5);
  EXPECT_NEAR(intdim(realize_matrix(m).x), m.realized_intdim(), 1e-10);
}

// Expected values from an independent evaluation of the same closed forms.
TEST(Bounds, BoundedCaseRegression) {
  BoundInputs in;
  in.delta = 0.2;
  in.m = 10;
  in.n = 1000;
  in.d = 20;
  in.p = 0.1;
  in.b = 20.0;
  EXPECT_NEAR(bound_bounded_case(in), 85.38824323170108, 1e-9);
  in.n = 1e12;
  EXPECT_LT(bound_bounded_case(in), 1e-3);
  in.b.reset();
  EXPECT_THROW(bound_bounded_case(in), MissingBound);
}

TEST(Bounds, SubgaussianRegressionAndPrecondition) {
  BoundInputs in;
  in.delta = 0.2;
  in.m = 100;
  in.n = 1000;
  in.r_star = 10;
  in.p = 0.1;
  const SubgaussianBound b = bound_subgaussian(in);
  EXPECT_NEAR(b.value, 0.48902807839604867, 1e-12);
  EXPECT_TRUE(b.precondition_met);  // needs n ≥ 422.69
  in.n = 400;
  EXPECT_FALSE(bound_subgaussian(in).precondition_met);
  in.r_star = 1;
  in.n = 1e14;
  EXPECT_LT(bound_subgaussian(in).value, 1e-4);
}

TEST(Bounds, SimplifiedRate) {
  EXPECT_NEAR(bound_simplified(10, 1000, 100, 0.2), 0.4422906286621644, 1e-12);
  EXPECT_NEAR(bound_simplified(10, 1000, 100, 0.2), 0.36512925464970225 + 0.07716137401246213,
              1e-12);
  EXPECT_LT(bound_simplified(10, 1000, 100, 1e6), 1e-6);
}

TEST(Bounds, MonotoneInSampleSizeAndDimension) {
  for (double rs : {2.0, 10.0, 40.0})
    for (double n = 100; n < 1e5; n *= 2)
      EXPECT_GT(bound_simplified(rs, n, 20, 0.2), bound_simplified(rs, 2 * n, 20, 0.2));
  for (double n : {100.0, 1000.0})
    EXPECT_LT(bound_simplified(2, n, 20, 0.2), bound_simplified(4, n, 20, 0.2));
}

TEST(Assumptions, ExactCopiesPass) {
  const RealizedModel real = realize_matrix(model_m1(10, 2, 0.5, 1.0, 0.2, 1));
  const std::vector<Matrix> copies(3, real.x);
  const AssumptionReport rep = check_assumptions(real.x, copies, 2);
  EXPECT_NEAR(rep.delta, 0.2, 1e-12);
  EXPECT_EQ(rep.max_local_error, 0.0);
  EXPECT_TRUE(rep.all_ok());
  EXPECT_NEAR(deterministic_bound_rhs(real.x, copies, rep.delta), 0.0, 1e-13);
}

TEST(Assumptions, LargePerturbationFlagged) {
  const RealizedModel real = realize_matrix(model_m1(10, 2, 0.5, 1.0, 0.2, 1));
  const Matrix bump = 0.03 * Matrix::Identity(10, 10);  // 0.03 > δ/8 = 0.025
  const std::vector<Matrix> x_hats{real.x + bump, real.x - bump};
  const AssumptionReport rep = check_assumptions(real.x, x_hats, 2);
  EXPECT_NEAR(rep.max_local_error, 0.03, 1e-12);
  EXPECT_NEAR(rep.mean_error, 0.0, 1e-12);
  EXPECT_FALSE(rep.local_error_ok);
  EXPECT_NEAR(deterministic_bound_rhs(real.x, x_hats, 0.2), 0.03 * 0.03 / 0.04, 1e-12);
}

TEST(Assumptions, Errors) {
  const Matrix x = Matrix::Identity(3, 3);
  Matrix asym = x;
  asym(0, 2) = 0.5;
  const std::vector<Matrix> bad{asym};
  EXPECT_THROW(check_assumptions(x, bad, 1), NotSymmetric);
  const std::vector<Matrix> wrong{Matrix::Identity(4, 4)};
  EXPECT_THROW(check_assumptions(x, wrong, 1), DimensionMismatch);
  EXPECT_THROW(deterministic_bound_rhs(x, std::vector<Matrix>{}, 0.2), DimensionMismatch);
}
