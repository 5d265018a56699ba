#include <gtest/gtest.h>

#include <vector>

#include "eigenfed/errors.hpp"
#include "eigenfed/estimators.hpp"
#include "eigenfed/metrics.hpp"
#include "eigenfed/models.hpp"

using namespace eigenfed;

namespace {

struct Noisy {
  RealizedModel real;
  std::vector<Matrix> x_hats;
  std::vector<LocalSolution> sols;
};

Noisy noisy_instance(Eigen::Index d, Eigen::Index r, std::size_t m, std::size_t n, Seed seed) {
  Noisy out{realize_matrix(model_m1(d, r, 0.5, 1.0, 0.2, derive_seed(seed, {0}))), {}, {}};
  for (std::size_t i = 0; i < m; ++i) {
    out.x_hats.push_back(local_covariance(sample_gaussian(out.real.x, n, derive_seed(seed, {1, i}))));
    out.sols.push_back(solve_local(out.x_hats.back(), r, static_cast<std::uint32_t>(i)));
  }
  return out;
}

std::vector<LocalSolution> rotated_copies(const SubspaceEstimate &v, std::size_t m, Seed seed) {
  std::vector<LocalSolution> out;
  for (std::size_t i = 0; i < m; ++i)
    out.push_back({static_cast<std::uint32_t>(i),
                   SubspaceEstimate(v.basis() * haar_orthogonal(v.dim_subspace(),
                                                                derive_seed(seed, {i}))),
                   {}});
  return out;
}

LocalSolution sol(const Matrix &basis, std::uint32_t id = 0) {
  return {id, SubspaceEstimate(basis), {}};
}

} // namespace

TEST(SolveLocal, NoiselessRecoversTruth) {
  const RealizedModel real = realize_matrix(model_m1(12, 3, 0.5, 1.0, 0.2, 3));
  EXPECT_LE(subspace_dist2(solve_local(real.x, 3).estimate, real.v1), 1e-8);
  const Matrix diag = Eigen::Vector3d(3, 2, 1).asDiagonal();
  EXPECT_TRUE(solve_local(diag, 1).estimate.basis().isApprox(Matrix::Identity(3, 1)));
}

TEST(SolveLocal, PropagatesNotSymmetric) {
  Matrix a = Matrix::Identity(3, 3);
  a(2, 0) = 1.0;
  EXPECT_THROW(solve_local(a, 1), NotSymmetric);
}

TEST(NaiveAverage, SignCancellationIsDegenerate) {
  const Matrix v = haar_stiefel(5, 1, 2).basis();
  const std::vector<LocalSolution> sols{sol(v, 0), sol(-v, 1)};
  const AggregateSolution out = naive_average(sols);
  EXPECT_TRUE(out.degenerate());
  EXPECT_EQ(out.pre_qr_sigma_min, 0.0);
  EXPECT_THROW(out.subspace(), Error);
}

TEST(NaiveAverage, IdenticalInputs) {
  const SubspaceEstimate v = haar_stiefel(7, 2, 3);
  const std::vector<LocalSolution> sols(3, LocalSolution{0, v, {}});
  EXPECT_LE(subspace_dist2(naive_average(sols).subspace(), v), 1e-9);
}

TEST(NaiveAverage, ReflectionWitnessVersusProcrustes) {
  const SubspaceEstimate v = haar_stiefel(9, 2, 4);
  Matrix flip = Matrix::Identity(2, 2);
  flip(0, 0) = -1.0;
  const std::vector<LocalSolution> sols{sol(v.basis(), 0), sol(v.basis(), 1),
                                        sol(v.basis() * flip, 2), sol(v.basis() * flip, 3)};
  const AggregateSolution naive = naive_average(sols);
  // The first column cancels exactly, so no rank-2 estimate exists.
  EXPECT_TRUE(naive.degenerate());
  EXPECT_LE(subspace_dist2(procrustes_fix_average(sols).subspace(), v), 1e-8);
}

TEST(SignFix, FlipsAndSingles) {
  const Matrix v = haar_stiefel(6, 1, 5).basis();
  const std::vector<LocalSolution> sols{sol(v, 0), sol(-v, 1), sol(v, 2)};
  const AggregateSolution out = sign_fix_average(sols);
  EXPECT_TRUE(out.subspace().basis().isApprox(v));
  const std::vector<LocalSolution> single{sol(-v)};
  EXPECT_TRUE(sign_fix_average(single).subspace().basis().isApprox(-v));
}

TEST(SignFix, ZeroInnerProductCountsAsPositive) {
  Matrix e1 = Matrix::Zero(3, 1), e2 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  const std::vector<LocalSolution> sols{sol(e1, 0), sol(e2, 1)};
  Matrix expected = (e1 + e2) / std::sqrt(2.0);
  EXPECT_TRUE(sign_fix_average(sols).subspace().basis().isApprox(expected));
}

TEST(SignFix, Errors) {
  const std::vector<LocalSolution> two{sol(Matrix::Identity(4, 2))};
  EXPECT_THROW(sign_fix_average(two), ShapeError);
  const std::vector<LocalSolution> one{sol(Matrix::Identity(4, 1))};
  EXPECT_THROW(sign_fix_average(one, 1), DimensionMismatch);
  EXPECT_THROW(sign_fix_average(std::vector<LocalSolution>{}), DimensionMismatch);
}

TEST(ProcrustesFix, PureAmbiguityIsRemoved) {
  const SubspaceEstimate v = haar_stiefel(10, 3, 6);
  const auto sols = rotated_copies(v, 5, 7);
  EXPECT_LE(subspace_dist2(procrustes_fix_average(sols).subspace(), v), 1e-8);
  // Averaging exact copies aligned to node 0 returns node 0's basis.
  EXPECT_LE((procrustes_fix_average(sols).subspace().basis() - sols[0].estimate.basis())
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(ProcrustesFix, SingleSolution) {
  const SubspaceEstimate v = haar_stiefel(6, 2, 8);
  const std::vector<LocalSolution> sols{{0, v, {}}};
  EXPECT_LE(subspace_dist2(procrustes_fix_average(sols).subspace(), v), 1e-12);
}

TEST(ProcrustesFix, ShapeErrors) {
  const std::vector<LocalSolution> mixed{sol(Matrix::Identity(4, 2), 0),
                                         sol(Matrix::Identity(5, 2), 1)};
  EXPECT_THROW(procrustes_fix_average(mixed), DimensionMismatch);
  const std::vector<LocalSolution> ok{sol(Matrix::Identity(4, 2))};
  EXPECT_THROW(procrustes_fix_average(ok, SubspaceEstimate(Matrix::Identity(4, 1))),
               DimensionMismatch);
}

TEST(ProcrustesFix, AnyReferenceGivesSameSubspaceWhenNoiseless) {
  const SubspaceEstimate v = haar_stiefel(8, 2, 9);
  const auto sols = rotated_copies(v, 4, 10);
  for (const auto &ref : sols)
    EXPECT_LE(subspace_dist2(procrustes_fix_average(sols, ref.estimate).subspace(), v), 1e-10);
}

TEST(ProcrustesFix, RankOneEqualsSignFix) {
  for (Seed s = 0; s < 10; ++s) {
    const Noisy inst = noisy_instance(15, 1, 6, 80, s);
    EXPECT_LE(subspace_dist2(procrustes_fix_average(inst.sols).subspace(),
                             sign_fix_average(inst.sols).subspace()),
              1e-10);
  }
}

TEST(ProcrustesFix, InvariantToPerNodeRotations) {
  for (Seed s = 0; s < 10; ++s) {
    const Noisy inst = noisy_instance(20, 3, 5, 100, s);
    std::vector<LocalSolution> rot;
    for (std::size_t i = 0; i < inst.sols.size(); ++i)
      rot.push_back(sol(inst.sols[i].estimate.basis() * haar_orthogonal(3, derive_seed(s, {9, i})),
                        static_cast<std::uint32_t>(i)));
    EXPECT_LE(subspace_dist2(procrustes_fix_average(inst.sols).subspace(),
                             procrustes_fix_average(rot).subspace()),
              1e-8);
    EXPECT_LE(subspace_dist2(projector_average(inst.sols).subspace(),
                             projector_average(rot).subspace()),
              1e-8);
    EXPECT_LE(subspace_dist2(iterative_refinement(inst.sols, 3).subspace(),
                             iterative_refinement(rot, 3).subspace()),
              1e-8);
  }
}

TEST(ProcrustesFix, Deterministic) {
  const Noisy inst = noisy_instance(20, 3, 5, 100, 21);
  EXPECT_EQ(procrustes_fix_average(inst.sols).subspace().basis(),
            procrustes_fix_average(inst.sols).subspace().basis());
}

TEST(IterativeRefinement, OneStepEqualsProcrustesFix) {
  const Noisy inst = noisy_instance(20, 3, 5, 100, 4);
  const AggregateSolution one = iterative_refinement(inst.sols, 1);
  EXPECT_EQ(one.subspace().basis(), procrustes_fix_average(inst.sols).subspace().basis());
  EXPECT_EQ(one.method, Method::Iterative);
  EXPECT_EQ(iterative_refinement(inst.sols, 4).rounds_used, 4u);
  EXPECT_THROW(iterative_refinement(inst.sols, 0), Error);
}

TEST(IterativeRefinement, NoiselessFixedPoint) {
  const SubspaceEstimate v = haar_stiefel(12, 3, 13);
  const auto sols = rotated_copies(v, 4, 14);
  const AggregateSolution a = iterative_refinement(sols, 1);
  const AggregateSolution b = iterative_refinement(sols, 2);
  EXPECT_LE(subspace_dist2(a.subspace(), b.subspace()), 1e-10);
  EXPECT_LE(subspace_dist2(b.subspace(), v), 1e-10);
}

TEST(ProjectorAverage, ExactRecoveryAndSingleInput) {
  const SubspaceEstimate v = haar_stiefel(9, 3, 15);
  EXPECT_LE(subspace_dist2(projector_average(rotated_copies(v, 4, 16)).subspace(), v), 1e-8);
  const std::vector<LocalSolution> one{{0, v, {}}};
  const AggregateSolution out = projector_average(one);
  EXPECT_LE(subspace_dist2(out.subspace(), v), 1e-10);
  EXPECT_NEAR(out.pre_qr_sigma_min, 1.0, 1e-12);
}

TEST(CentralEstimator, SingleNodeAndNoiseless) {
  const Noisy inst = noisy_instance(15, 2, 1, 50, 17);
  const std::vector<NodeDataset> one{{0, std::nullopt, inst.x_hats[0], 50}};
  EXPECT_LE(subspace_dist2(central_estimator(one, 2).subspace(), inst.sols[0].estimate), 1e-12);
  const std::vector<NodeDataset> exact{{0, std::nullopt, inst.real.x, 0},
                                       {1, std::nullopt, inst.real.x, 0}};
  EXPECT_LE(subspace_dist2(central_estimator(exact, 2).subspace(), inst.real.v1), 1e-10);
  EXPECT_THROW(central_estimator(std::vector<NodeDataset>{}, 2), DimensionMismatch);
}

TEST(OrthonormalizeAverage, FallsBackThenFlags) {
  Matrix avg = Matrix::Zero(4, 2);
  avg(0, 0) = 1.0;
  const AggregateSolution out = orthonormalize_average(avg, Method::Procrustes);
  EXPECT_TRUE(out.degenerate());
  EXPECT_EQ(out.pre_qr_sigma_min, 0.0);
  avg(1, 1) = 1e-3;
  const AggregateSolution ok = orthonormalize_average(avg, Method::Procrustes, 3);
  EXPECT_FALSE(ok.degenerate());
  EXPECT_EQ(ok.rounds_used, 3u);
  EXPECT_NEAR(ok.pre_qr_sigma_min, 1e-3, 1e-15);
}

TEST(GenericAlignAverage, UndoesRotation) {
  Rng rng(18);
  const Matrix z = rng.normal_matrix(7, 3);
  const Matrix q = haar_orthogonal(3, 19);
  const std::vector<Matrix> factors{z, z * q};
  EXPECT_LE((generic_align_average(factors) - z).norm(), 1e-9);
  const std::vector<Matrix> single{z};
  EXPECT_LE((generic_align_average(single) - z).norm(), 1e-12);
  const std::vector<Matrix> bad{z, Matrix::Zero(7, 2)};
  EXPECT_THROW(generic_align_average(bad), DimensionMismatch);
  EXPECT_THROW(generic_align_average(factors, 2), DimensionMismatch);
}
