#pragma once

#include "mahal/clustering.hpp"
#include "mahal/informed_pca.hpp"
#include "mahal/matrix_core.hpp"

#include <optional>
#include <vector>

namespace mahal {

/// Global metric with pinv(S) ~ W W^T, W = U_K diag(lambda_K)^{-1/2}.
struct GlobalMetricModel {
  PrincipalBasis basis;
  Matrix factor;  ///< m x K
  bool informed = false;
  std::optional<ClusterAssignment> row_clusters;  ///< k-means result when informed

  Index dim() const noexcept { return factor.rows(); }
};

struct GlobalFitOptions {
  Index rank = 2;                   ///< K
  bool informed = false;
  std::optional<Index> clusters;    ///< K_c, defaults to K + 1
  KMeansOptions kmeans{};           ///< `clusters` field is overwritten by K_c
  std::optional<IndicatorMatrix> indicator;  ///< fixed row clustering, skips k-means
  ConstrainedPcaOptions constrained{};
  bool center = true;
};

/**
 * Plain mode: top-K PCA of the sample covariance of D.
 * Informed mode: k-means on the rows of D, then constrained PCA inside the
 * span of the resulting indicator matrix, whitened with the plain eigenvalues.
 */
GlobalMetricModel fit_global(const DataMatrix& d, const GlobalFitOptions& options);

/// Same, from a given covariance. Informed mode needs options.indicator.
GlobalMetricModel fit_global_from_covariance(const Covariance& sigma,
                                             const GlobalFitOptions& options);

/// Squared distance ||W^T (c1 - c2)||^2.
double global_distance(const GlobalMetricModel& model, const Vector& c1, const Vector& c2);

/// n x n matrix of squared distances between the columns of D.
Matrix distance_matrix(const GlobalMetricModel& model, const DataMatrix& d);

/// Per-column local metrics built from nearest-neighbor patches.
struct LocalMetricModel {
  std::vector<Matrix> factors;  ///< W_i, m x d, one per column
  std::vector<std::vector<Index>> neighborhoods;
  Index neighbors = 0;  ///< N
  Index rank = 0;       ///< d
  bool informed = false;

  Index size() const noexcept { return static_cast<Index>(factors.size()); }
};

struct LocalFitOptions {
  Index neighbors = 20;  ///< N, the column itself included
  Index rank = 6;        ///< d
  bool informed = false;
  Index clusters = 7;    ///< K_c per neighborhood
  std::uint64_t seed = 0;
  int kmeans_restarts = 20;
  int kmeans_max_iters = 300;
  ConstrainedPcaOptions constrained{};
  unsigned threads = 1;
};

/**
 * For every column c_i: take its N nearest columns (Euclidean, ties by index),
 * center them, and keep the top-d eigenpairs of their covariance. Informed
 * mode clusters the rows of the patch and constrains the directions to the
 * cluster subspace. Rank failures name the offending column.
 */
LocalMetricModel fit_local(const DataMatrix& d, const LocalFitOptions& options);

/// 1/2 (c_i - c_j)^T (pinv(S_i) + pinv(S_j)) (c_i - c_j).
double local_distance(const LocalMetricModel& model, Index i, Index j, const DataMatrix& d);

Matrix distance_matrix(const LocalMetricModel& model, const DataMatrix& d);

/// Indices of the N nearest columns to column i, nearest first.
std::vector<Index> nearest_columns(const DataMatrix& d, Index i, Index count);

}  // namespace mahal
