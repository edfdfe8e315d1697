#include "mahal/metrics.hpp"
#include "mahal/synthgen.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace mahal {
namespace {

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// With the exact covariance the metric equals the hidden Mahalanobis
// distance (x1 - x2)^T Sx^{-1} (x1 - x2) with Sx = I / 12.
TEST(GlobalMetric, ExactCovarianceRecoversHiddenMahalanobis) {
  const LinearModelDataset data = gen_linear_model(2000, 5);
  GlobalFitOptions o;
  o.rank = 2;
  const GlobalMetricModel model =
      fit_global_from_covariance(Covariance::dense(linear_model_covariance(data.mixing)), o);
  Rng rng(9);
  std::uniform_int_distribution<Index> pick(0, 1999);
  double worst = 0.0;
  for (int p = 0; p < 1000; ++p) {
    const Index i = pick(rng), j = pick(rng);
    const double hidden = 12.0 * (data.hidden.col(i) - data.hidden.col(j)).squaredNorm();
    const double d = global_distance(model, data.d.col(i), data.d.col(j));
    worst = std::max(worst, std::abs(d - hidden) / std::max(hidden, 1e-12));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(GlobalMetric, IdentityCovarianceIsEuclidean) {
  GlobalFitOptions o;
  o.rank = 4;
  const GlobalMetricModel model = fit_global_from_covariance(Covariance::dense(Matrix::Identity(4, 4)), o);
  Rng rng(1);
  const Vector a = test::gaussian_matrix(4, 1, rng), b = test::gaussian_matrix(4, 1, rng);
  EXPECT_NEAR(global_distance(model, a, b), (a - b).squaredNorm(), 1e-12);
}

TEST(GlobalMetric, OrthonormalRowsGiveEuclidean) {
  Rng rng(2);
  const Index n = 9;
  Eigen::HouseholderQR<Matrix> qr(test::gaussian_matrix(n, 4, rng));
  const Matrix rows = (qr.householderQ() * Matrix::Identity(n, 4)).transpose() * std::sqrt(n - 1.0);
  GlobalFitOptions o;
  o.rank = 4;
  o.center = false;
  const DataMatrix d(rows);
  const GlobalMetricModel model = fit_global(d, o);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      EXPECT_NEAR(global_distance(model, d.col(i), d.col(j)), (d.col(i) - d.col(j)).squaredNorm(), 1e-10);
}

TEST(GlobalMetric, SelfDistanceZeroAndLengthChecked) {
  Rng rng(3);
  const DataMatrix d(test::gaussian_matrix(5, 12, rng));
  const GlobalMetricModel model = fit_global(d, {});
  EXPECT_EQ(global_distance(model, d.col(3), d.col(3)), 0.0);
  EXPECT_EQ(global_distance(model, d.col(1), d.col(2)), global_distance(model, d.col(2), d.col(1)));
  EXPECT_THROW(global_distance(model, Vector::Zero(4), Vector::Zero(5)), Error);
}

TEST(GlobalMetric, DistanceMatrixSymmetricZeroDiagonal) {
  Rng rng(4);
  const DataMatrix d(test::gaussian_matrix(6, 15, rng));
  GlobalFitOptions o;
  o.rank = 3;
  const Matrix dm = distance_matrix(fit_global(d, o), d);
  EXPECT_EQ((dm - dm.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(dm.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(dm.minCoeff(), 0.0);
  const GlobalMetricModel model = fit_global(d, o);
  EXPECT_NEAR(dm(2, 7), global_distance(model, d.col(2), d.col(7)), 1e-12);
}

TEST(GlobalMetric, SingleColumnDistanceMatrix) {
  Rng rng(5);
  const DataMatrix d(test::gaussian_matrix(4, 10, rng));
  const GlobalMetricModel model = fit_global(d, {});
  const Matrix dm = distance_matrix(model, d.leading_columns(1));
  EXPECT_EQ(dm.rows(), 1);
  EXPECT_EQ(dm(0, 0), 0.0);
}

TEST(GlobalMetric, OrthogonalTransformInvariance) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const Matrix raw = test::gaussian_matrix(7, 30, rng);
    const Matrix q = test::random_orthogonal(7, rng);
    GlobalFitOptions o;
    o.rank = 3;
    const DataMatrix a(raw), b(q * raw);
    const Matrix da = distance_matrix(fit_global(a, o), a);
    const Matrix db = distance_matrix(fit_global(b, o), b);
    EXPECT_LT((da - db).cwiseAbs().maxCoeff() / da.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(GlobalMetric, SingletonClustersMatchPlain) {
  Rng rng(6);
  const DataMatrix d(test::gaussian_matrix(10, 25, rng));
  GlobalFitOptions plain;
  plain.rank = 3;
  GlobalFitOptions informed = plain;
  informed.informed = true;
  informed.indicator = IndicatorMatrix::singletons(10);
  const Matrix a = distance_matrix(fit_global(d, plain), d);
  const Matrix b = distance_matrix(fit_global(d, informed), d);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(GlobalMetric, LinearModelBothModesTrackHiddenDistance) {
  const LinearModelDataset data = gen_linear_model(500, 1);
  GlobalFitOptions o;
  o.rank = 2;
  o.clusters = 3;
  o.kmeans.seed = 4;
  for (bool informed : {false, true}) {
    o.informed = informed;
    const Matrix dm = distance_matrix(fit_global(data.d, o), data.d);
    std::vector<double> a, b;
    for (Index j = 0; j < 500; ++j)
      for (Index i = j + 1; i < 500; ++i) {
        a.push_back(std::sqrt(dm(i, j)));
        b.push_back((data.hidden.col(i) - data.hidden.col(j)).norm());
      }
    EXPECT_GE(corr(a, b), 0.99) << (informed ? "informed" : "plain");
  }
}

TEST(GlobalMetric, InformedBeatsPlainOnBlockModel) {
  BlockModelParams p;
  const BlockModelDataset data = gen_block_model(p, 8);
  const PrincipalBasis truth = block_model_principal_directions(data, 18);
  GlobalFitOptions o;
  o.rank = 18;
  o.kmeans.seed = 1;
  const GlobalMetricModel plain = fit_global(data.d, o);
  o.informed = true;
  const GlobalMetricModel informed = fit_global(data.d, o);
  EXPECT_LT(pd_error(informed.basis.directions, truth.directions, ProjectorNorm::frobenius),
            pd_error(plain.basis.directions, truth.directions, ProjectorNorm::frobenius));
  ASSERT_TRUE(informed.row_clusters.has_value());
  EXPECT_EQ(informed.row_clusters->clusters(), 19);
}

TEST(GlobalMetric, InformedFromCovarianceNeedsIndicator) {
  GlobalFitOptions o;
  o.informed = true;
  EXPECT_THROW(fit_global_from_covariance(Covariance::dense(Matrix::Identity(3, 3)), o), Error);
}

TEST(NearestColumns, SelfFirstThenByDistance) {
  Matrix a(1, 5);
  a << 0.0, 3.0, 1.0, -2.0, 10.0;
  const DataMatrix d(a);
  EXPECT_EQ(nearest_columns(d, 0, 4), (std::vector<Index>{0, 2, 3, 1}));
  EXPECT_EQ(nearest_columns(d, 4, 2), (std::vector<Index>{4, 1}));
}

TEST(LocalMetric, LinearSubspaceIsRecoveredEverywhere) {
  Rng rng(7);
  const Matrix basis = test::gaussian_matrix(10, 2, rng);
  const DataMatrix d(basis * test::gaussian_matrix(2, 60, rng));
  LocalFitOptions o;
  o.neighbors = 12;
  o.rank = 2;
  const LocalMetricModel model = fit_local(d, o);
  ASSERT_EQ(model.size(), 60);
  for (const Matrix& w : model.factors) EXPECT_GT(test::principal_cosines(w, basis).minCoeff(), 1.0 - 5e-13);
}

TEST(LocalMetric, SharedNeighborhoodEqualsGlobal) {
  const LinearModelDataset data = gen_linear_model(40, 2);
  LocalFitOptions lo;
  lo.neighbors = 40;
  lo.rank = 2;
  const LocalMetricModel local = fit_local(data.d, lo);
  GlobalFitOptions go;
  go.rank = 2;
  const GlobalMetricModel global = fit_global(data.d, go);
  for (Index i = 0; i < 40; i += 3)
    for (Index j = 0; j < 40; j += 7) {
      const double g = global_distance(global, data.d.col(i), data.d.col(j));
      EXPECT_NEAR(local_distance(local, i, j, data.d), g, 1e-8 * std::max(g, 1.0));
    }
}

TEST(LocalMetric, SymmetricWithZeroSelfDistance) {
  Rng rng(8);
  const DataMatrix d(test::gaussian_matrix(6, 30, rng));
  LocalFitOptions o;
  o.neighbors = 10;
  o.rank = 3;
  o.informed = true;
  o.clusters = 3;
  o.kmeans_restarts = 2;
  const LocalMetricModel model = fit_local(d, o);
  for (Index i = 0; i < 30; ++i) {
    EXPECT_EQ(local_distance(model, i, i, d), 0.0);
    for (Index j = 0; j < 30; ++j)
      EXPECT_EQ(local_distance(model, i, j, d), local_distance(model, j, i, d));
  }
  const Matrix dm = distance_matrix(model, d);
  EXPECT_EQ((dm - dm.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(dm(4, 9), local_distance(model, 4, 9, d), 1e-10 * dm(4, 9));
}

TEST(LocalMetric, RankFailureNamesTheColumn) {
  Rng rng(9);
  const DataMatrix d(test::gaussian_matrix(8, 2, rng) * test::gaussian_matrix(2, 20, rng));
  LocalFitOptions o;
  o.neighbors = 8;
  o.rank = 3;
  try {
    fit_local(d, o);
    FAIL();
  } catch (const RankDeficiencyError& e) {
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
    EXPECT_EQ(e.attainable(), 2);
  }
}

TEST(LocalMetric, InvalidSizesAreRejected) {
  Rng rng(10);
  const DataMatrix d(test::gaussian_matrix(4, 10, rng));
  LocalFitOptions o;
  o.neighbors = 11;
  EXPECT_THROW(fit_local(d, o), Error);
  o.neighbors = 5;
  o.rank = 5;
  EXPECT_THROW(fit_local(d, o), Error);
}

// Points on the paraboloid f(x) = (x1, x2, x1^2 + x2^2). The oracle is the
// hidden local Mahalanobis distance 1/2 dx^T (Cx_i^-1 + Cx_j^-1) dx, with Cx_i
// the covariance of x over the same neighborhood. Curvature is the only error.
TEST(LocalMetric, NonlinearMapTracksHiddenLocalMahalanobis) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index n = 400;
  Matrix x(2, n), c(3, n);
  for (Index i = 0; i < n; ++i) {
    x(0, i) = u(rng);
    x(1, i) = u(rng);
    c.col(i) << x(0, i), x(1, i), x(0, i) * x(0, i) + x(1, i) * x(1, i);
  }
  const DataMatrix d(c);
  LocalFitOptions o;
  o.neighbors = 30;
  o.rank = 2;
  const LocalMetricModel model = fit_local(d, o);
  std::vector<Matrix> cx_inv;
  for (const auto& nb : model.neighborhoods) {
    Matrix xs(2, static_cast<Index>(nb.size()));
    for (std::size_t k = 0; k < nb.size(); ++k) xs.col(static_cast<Index>(k)) = x.col(nb[k]);
    cx_inv.push_back(sample_covariance(DataMatrix(xs)).inverse());
  }
  std::vector<double> rel;
  for (Index i = 0; i < n; ++i)
    for (std::size_t k = 1; k < 6; ++k) {
      const Index j = model.neighborhoods[static_cast<std::size_t>(i)][k];
      const Vector dx = x.col(i) - x.col(j);
      const double hidden =
          0.5 * dx.dot((cx_inv[static_cast<std::size_t>(i)] + cx_inv[static_cast<std::size_t>(j)]) * dx);
      rel.push_back(std::abs(local_distance(model, i, j, d) / hidden - 1.0));
    }
  std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
  EXPECT_LE(rel[rel.size() / 2], 0.10);
}

}  // namespace
}  // namespace mahal
