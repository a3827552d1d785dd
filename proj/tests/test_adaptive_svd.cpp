#include "adsvd/adaptive_svd.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace adsvd;
using adsvd::testing::Rng;
using adsvd::testing::batch_svd;
using adsvd::testing::max_principal_angle;
using adsvd::testing::max_rel_error;
using adsvd::testing::orthonormality_error;

namespace {

Vector values(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) {
    out(i++) = x;
  }
  return out;
}

Vector sorted_desc(Vector v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<>());
  return v;
}

// Random basis with orthonormal U (d x r) and spread-out singular values.
FactoredBasis random_basis(Rng& rng, Index d, Index r, Matrix* u_out = nullptr) {
  const Matrix u = rng.orthonormal(d, r);
  Vector s(r);
  for (Index i = 0; i < r; ++i) {
    s(i) = rng.uniform(1.0, 20.0);
  }
  s = sorted_desc(s);
  if (u_out != nullptr) {
    *u_out = u;
  }
  return basis_from_columns(u, s, r);
}

}  // namespace

TEST(ThresholdIndex, FirstSmallGap) {
  const auto c = threshold_index(values({10, 9.5, 9.2, 1.0, 0.9}), 1.0);
  EXPECT_EQ(c.i_hat, 1);
  EXPECT_EQ(c.tau, 10.0);
}

TEST(ThresholdIndex, LaterGap) {
  const auto c = threshold_index(values({10, 5, 1, 0.99}), 0.5);
  EXPECT_EQ(c.i_hat, 3);
  EXPECT_EQ(c.tau, 1.0);
}

TEST(ThresholdIndex, FallsBackToFullRank) {
  const auto c = threshold_index(values({4, 2, 0}), 0.1);
  EXPECT_EQ(c.i_hat, 3);
  EXPECT_EQ(c.tau, 0.0);
}

TEST(ThresholdIndex, RejectsEmpty) {
  EXPECT_THROW(threshold_index(Vector(), 1.0), std::invalid_argument);
}

TEST(ThresholdIndex, ScaleEquivariant) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Vector s(rng.uniform_int(1, 12));
    for (Index i = 0; i < s.size(); ++i) {
      s(i) = rng.uniform(0.0, 10.0);
    }
    s = sorted_desc(s);
    const double tau_star = rng.uniform(0.0, 3.0);
    // Powers of two keep the scaled gaps bit-identical.
    const double c = std::ldexp(1.0, rng.uniform_int(-6, 6));
    EXPECT_EQ(threshold_index(s, tau_star).i_hat,
              threshold_index(Vector(c * s), c * tau_star).i_hat);
  }
}

TEST(SvdComp, TwoScaledAxes) {
  Matrix a = Matrix::Zero(4, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 2.0;
  const FactoredBasis b = svd_comp(a, 2, 0.5);
  ASSERT_EQ(b.rank(), 2);
  EXPECT_NEAR(b.sigma(0), 3.0, 1e-14);
  EXPECT_NEAR(b.sigma(1), 2.0, 1e-14);
  const Matrix u = b.columns();
  EXPECT_LT(u.bottomRows(2).norm(), 1e-14);
  EXPECT_LT(orthonormality_error(u), 1e-14);
}

TEST(SvdComp, RankOneKeepsOneDirection) {
  Rng rng(12);
  const Vector x = rng.gaussian(20, 1);
  const Vector y = rng.gaussian(5, 1);
  const Matrix a = x * y.transpose();
  const FactoredBasis b = svd_comp(a, 3, 0.0);
  ASSERT_EQ(b.rank(), 1);
  EXPECT_NEAR(b.sigma(0), a.norm(), 1e-12 * a.norm());
}

TEST(SvdComp, MatchesBatchSvd) {
  Rng rng(13);
  const Matrix a = rng.gaussian(50, 10);
  const FactoredBasis b = svd_comp(a, 10, 0.0);
  const auto ref = batch_svd(a);
  EXPECT_LT(max_rel_error(b.sigma, ref.sigma), 1e-10);
  EXPECT_LT(orthonormality_error(b.columns()), 1e-12);
  EXPECT_LT(max_principal_angle(ref.u, b.columns()), 1e-10);
}

TEST(SvdComp, TruncatesToEll) {
  Rng rng(14);
  const Matrix a = rng.gaussian(60, 12);
  const FactoredBasis b = svd_comp(a, 5, 0.0);
  const auto ref = batch_svd(a);
  ASSERT_EQ(b.rank(), 5);
  EXPECT_EQ(b.house.size(), 5);
  EXPECT_LT(max_rel_error(b.sigma, ref.sigma.head(5)), 1e-10);
  EXPECT_LT(max_principal_angle(b.columns(), ref.u.leftCols(5)), 1e-9);
}

TEST(SvdComp, Errors) {
  EXPECT_THROW(svd_comp(Matrix(), 1, 0.0), std::invalid_argument);
  EXPECT_THROW(svd_comp(Matrix::Ones(5, 3), 4, 0.0), std::invalid_argument);
  EXPECT_THROW(svd_comp(Matrix::Ones(3, 5), 2, 0.0), std::invalid_argument);
  EXPECT_THROW(svd_comp(Matrix::Zero(5, 3), 2, 0.0), std::invalid_argument);
}

TEST(SvdAppend, InSpanColumnAddsEnergyOnly) {
  Rng rng(15);
  Matrix u;
  const FactoredBasis b = random_basis(rng, 40, 4, &u);
  const Vector c = rng.gaussian(4, 1);
  const auto res = svd_append(b, u * c, {.tau_star = 0.5});
  EXPECT_EQ(res.report.accepted, 0);
  EXPECT_EQ(res.report.rejected_frames, (std::vector<Index>{0}));
  EXPECT_EQ(res.basis.rank(), 4);
  EXPECT_NEAR(res.basis.sigma.squaredNorm(),
              b.sigma.squaredNorm() + c.squaredNorm(), 1e-10);
  EXPECT_LT(max_principal_angle(u, res.basis.columns()), 1e-10);
}

TEST(SvdAppend, InSpanColumnRejectedEvenWithoutThreshold) {
  Rng rng(16);
  Matrix u;
  const FactoredBasis b = random_basis(rng, 30, 3, &u);
  const auto res =
      svd_append(b, u * rng.gaussian(3, 1), {.bypass_threshold = true});
  EXPECT_EQ(res.report.accepted, 0);
  EXPECT_EQ(res.basis.rank(), 3);
}

TEST(SvdAppend, OrthogonalColumnGrowsRank) {
  Rng rng(17);
  Matrix u;
  const FactoredBasis b = random_basis(rng, 30, 3, &u);
  Vector x = rng.gaussian(30, 1);
  x -= u * (u.transpose() * x);
  x *= 50.0 / x.norm();
  const auto res = svd_append(b, x, {.tau_star = 0.1});
  EXPECT_EQ(res.report.accepted, 1);
  ASSERT_EQ(res.basis.rank(), 4);
  EXPECT_NEAR(res.basis.sigma(0), 50.0, 1e-12);
  EXPECT_LT(max_rel_error(res.basis.sigma.tail(3), b.sigma), 1e-13);
  EXPECT_LT(orthonormality_error(res.basis.columns()), 1e-12);
}

TEST(SvdAppend, MatchesBatchRecompute) {
  Rng rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 200;
    const Index r = 8;
    const Index n = 12;
    Matrix u;
    const FactoredBasis b = random_basis(rng, d, r, &u);
    const Matrix v = rng.orthonormal(n, r);
    const Matrix a_k = u * b.sigma.asDiagonal() * v.transpose();
    const Matrix block = rng.gaussian(d, 5);

    const auto res = svd_append(b, block, {.tau_star = 0.0});
    Matrix full(d, n + 5);
    full << a_k, block;
    const auto ref = batch_svd(full);

    ASSERT_EQ(res.basis.rank(), r + 5);
    EXPECT_LT(max_rel_error(res.basis.sigma, ref.sigma.head(r + 5)), 1e-8);
    EXPECT_LT(max_principal_angle(ref.u.leftCols(r + 5), res.basis.columns()),
              1e-6);
    EXPECT_LT(orthonormality_error(res.basis.columns()), 1e-10);
  }
}

TEST(SvdAppend, RankCapLimitsGrowth) {
  Rng rng(19);
  const FactoredBasis b = random_basis(rng, 60, 5, nullptr);
  const auto res =
      svd_append(b, rng.gaussian(60, 6), {.tau_star = 0.0, .max_rank = 8});
  EXPECT_EQ(res.report.accepted, 3);
  EXPECT_EQ(res.basis.rank(), 8);
  EXPECT_EQ(res.report.rejected_frames.size(), 3u);
}

TEST(SvdAppend, SignificanceIsMonotone) {
  Rng rng(20);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix u;
    const FactoredBasis b = random_basis(rng, 50, 6, &u);
    // Columns orthogonal to span(U) and to each other: residual pivots are
    // exactly the column norms.
    Matrix q = rng.orthonormal(50, 12).rightCols(6);
    q -= u * (u.transpose() * q);
    Eigen::HouseholderQR<Matrix> qr(q);
    q = qr.householderQ() * Matrix::Identity(50, 6);
    Vector norms(6);
    for (Index j = 0; j < 6; ++j) {
      norms(j) = rng.uniform(0.0, 25.0);
    }
    const Matrix block = q * norms.asDiagonal();
    const double tau_star = rng.uniform(0.0, 5.0);
    const double tau = threshold_index(b.sigma, tau_star).tau;
    const auto res = svd_append(b, block, {.tau_star = tau_star});
    EXPECT_EQ(res.report.tau, tau);
    for (Index j = 0; j < 6; ++j) {
      const bool rejected =
          std::find(res.report.rejected_frames.begin(),
                    res.report.rejected_frames.end(),
                    j) != res.report.rejected_frames.end();
      EXPECT_EQ(rejected, norms(j) < tau) << "column " << j;
    }
  }
}

TEST(SvdAppend, Errors) {
  Rng rng(21);
  const FactoredBasis b = random_basis(rng, 10, 4, nullptr);
  EXPECT_THROW(svd_append(b, Matrix::Ones(9, 1), {}), std::invalid_argument);
  EXPECT_THROW(svd_append(b, Matrix::Ones(10, 7), {}), std::invalid_argument);
  EXPECT_THROW(svd_append(b, Matrix(10, 0), {}), std::invalid_argument);
}

TEST(SvdAppend, FrobeniusConservedOverStream) {
  Rng rng(22);
  const Matrix a = rng.gaussian(80, 30);
  FactoredBasis b = svd_comp(a.leftCols(6), 6, 0.0);
  for (Index c = 6; c < 30; c += 4) {
    b = svd_append(b, a.middleCols(c, 4), {.tau_star = 0.0}).basis;
  }
  EXPECT_NEAR(b.sigma.squaredNorm(), a.squaredNorm(), 1e-10 * a.squaredNorm());
  EXPECT_LT(max_rel_error(b.sigma, batch_svd(a).sigma), 1e-10);
}

TEST(ReinitIII, NoOpWhenEllCoversRank) {
  Rng rng(23);
  Matrix u;
  const FactoredBasis b = random_basis(rng, 40, 6, &u);
  const FactoredBasis out = reinit_iii(b, 10);
  EXPECT_EQ(out.sigma, b.sigma);
  EXPECT_LT(max_principal_angle(u, out.columns()), 1e-10);
}

TEST(ReinitIII, EllOneKeepsLeadingVector) {
  Rng rng(24);
  Matrix u;
  const FactoredBasis b = random_basis(rng, 40, 6, &u);
  const FactoredBasis out = reinit_iii(b, 1);
  ASSERT_EQ(out.rank(), 1);
  EXPECT_EQ(out.sigma(0), b.sigma(0));
  EXPECT_EQ(out.house.size(), 1);
  const Vector got = out.columns().col(0);
  EXPECT_NEAR(std::abs(got.dot(u.col(0))), 1.0, 1e-12);
}

TEST(ReinitIII, PreservesLeadingSubspace) {
  Rng rng(25);
  const Matrix a = rng.gaussian(300, 20);
  FactoredBasis b = svd_comp(a.leftCols(10), 10, 0.0);
  b = svd_append(b, a.rightCols(10), {.tau_star = 0.0}).basis;
  ASSERT_EQ(b.rank(), 20);
  const Matrix before = b.columns(15);
  const FactoredBasis out = reinit_iii(b, 15);
  EXPECT_EQ(out.rank(), 15);
  EXPECT_LE(out.house.size(), 15);
  EXPECT_TRUE((out.sigma.array() == b.sigma.head(15).array()).all());
  EXPECT_LT(max_principal_angle(before, out.columns()), 1e-8);
  EXPECT_LT(orthonormality_error(out.columns()), 1e-10);
}

TEST(ReinitII, SingleImage) {
  Rng rng(26);
  const Matrix img = rng.gaussian(30, 1);
  const FactoredBasis b = reinit_ii(img, 15, 1.0);
  ASSERT_EQ(b.rank(), 1);
  EXPECT_NEAR(b.sigma(0), img.norm(), 1e-12);
}

TEST(ReinitII, RepeatedImage) {
  Rng rng(27);
  const Vector img = rng.gaussian(30, 1);
  const Matrix store = img.replicate(1, 9);
  const FactoredBasis b = reinit_ii(store, 15, 1.0);
  ASSERT_EQ(b.rank(), 1);
  EXPECT_NEAR(b.sigma(0), 3.0 * img.norm(), 1e-12);
}

TEST(ReinitII, MatchesTruncatedBatch) {
  Rng rng(28);
  const Matrix store = rng.gaussian(100, 12);
  const FactoredBasis b = reinit_ii(store, 8, 0.0);
  const auto ref = batch_svd(store);
  EXPECT_LT(max_rel_error(b.sigma, ref.sigma.head(8)), 1e-10);
  EXPECT_LT(max_principal_angle(b.columns(), ref.u.leftCols(8)), 1e-9);
  EXPECT_THROW(reinit_ii(Matrix(100, 0), 8, 0.0), std::invalid_argument);
}

TEST(ComputeRho, UnitColumns) {
  Rng rng(29);
  Matrix a = rng.gaussian(25, 7);
  a = a.colwise().normalized();
  EXPECT_NEAR(compute_rho(a, 30.0), std::sqrt(30.0), 1e-12);
  EXPECT_NEAR(std::sqrt(30.0), 5.4772, 1e-4);
}

TEST(ComputeRho, ZeroAndRandom) {
  EXPECT_EQ(compute_rho(Matrix::Zero(5, 3), 30.0), 0.0);
  Rng rng(30);
  const Matrix a = rng.gaussian(9, 4);
  double sq = 0.0;
  for (Index j = 0; j < 4; ++j) {
    for (Index i = 0; i < 9; ++i) {
      sq += a(i, j) * a(i, j);
    }
  }
  EXPECT_NEAR(compute_rho(a, 12.0), std::sqrt(sq / 4.0 * 12.0), 1e-12);
  EXPECT_THROW(compute_rho(Matrix(3, 0), 1.0), std::invalid_argument);
}

TEST(NormalizeSigma, Cases) {
  Rng rng(31);
  Matrix u;
  FactoredBasis b = random_basis(rng, 20, 2, &u);
  b.sigma = values({3, 4});
  EXPECT_EQ(normalize_sigma(b, 5.0).sigma, b.sigma);
  EXPECT_EQ(normalize_sigma(b, 7.0).sigma, b.sigma);
  const FactoredBasis half = normalize_sigma(b, 2.5);
  EXPECT_NEAR(half.sigma(0), 1.5, 1e-15);
  EXPECT_NEAR(half.sigma(1), 2.0, 1e-15);
  EXPECT_LT(max_principal_angle(u, half.columns()), 1e-12);
  EXPECT_THROW(normalize_sigma(b, 0.0), std::invalid_argument);
  EXPECT_THROW(normalize_sigma(b, -1.0), std::invalid_argument);
}

TEST(NormalizeSigma, ThresholdIndexInvariantUnderProportionalSlope) {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    FactoredBasis b = random_basis(rng, 40, 10, nullptr);
    const double tau_star = rng.uniform(0.1, 4.0);
    b = with_threshold(b, tau_star);
    const double rho = 0.25 * b.sigma.norm();
    const FactoredBasis n = normalize_sigma(b, rho);
    const double scale = n.sigma(0) / b.sigma(0);
    EXPECT_EQ(with_threshold(n, tau_star * scale).i_hat, b.i_hat);
    EXPECT_LE(n.sigma.norm(), rho * (1.0 + 1e-12));
  }
}
