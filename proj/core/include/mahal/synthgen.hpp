#pragma once

#include "mahal/informed_pca.hpp"
#include "mahal/matrix_core.hpp"
#include "mahal/survival.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mahal {

/// D = A X with X ~ U[0,1]^2 and three Gaussian row blocks in A.
struct LinearModelDataset {
  DataMatrix d;
  Matrix hidden;  ///< 2 x n
  Matrix mixing;  ///< m x 2
  std::vector<int> block_labels;  ///< 1, 2, 3 per row
};

LinearModelDataset gen_linear_model(Index n, std::uint64_t seed, Index rows_per_block = 400);

/// Exact covariance A Sigma_x A^T of the linear model, Sigma_x = I / 12.
Matrix linear_model_covariance(const Matrix& mixing);

struct BlockModelParams {
  Index m = 900;
  Index n = 100;
  Index clusters = 18;
  double sigma2 = 1.0;
  double rho = 0.5;
  double type_b_prob = 0.5;
  double offset_lo = 0.5;
  double offset_hi = 1.5;
  std::optional<Vector> mean_a;  ///< per cluster; drawn from U[0,1] when absent
  std::optional<Vector> mean_b;  ///< per cluster; mean_a +/- U[offset_lo, offset_hi] when absent
};

struct BlockModelDataset {
  DataMatrix d;
  std::vector<int> types;         ///< per column, 0 = type A, 1 = type B
  std::vector<Index> row_clusters;
  std::vector<Index> cluster_sizes;
  Vector mean_a;
  Vector mean_b;
  BlockModelParams params;
};

/**
 * Entries of cluster k in a type-t column are
 *   mu_kt + sqrt(rho) z_cluster + sqrt(sigma2 - rho) z_entry,
 * giving block-diagonal within-type covariance with variance sigma2 and
 * within-cluster covariance rho.
 */
BlockModelDataset gen_block_model(const BlockModelParams& params, std::uint64_t seed);

/// Sigma = C + p (1 - p) delta delta^T with delta = mu_B - mu_A per row.
Matrix block_model_covariance(const BlockModelDataset& data);

/// Top-K eigenpairs of the analytic covariance, computed inside span(H_true).
PrincipalBasis block_model_principal_directions(const BlockModelDataset& data, Index k);

enum class ProjectorNorm { frobenius, spectral };

/// ||U_bar U_bar^T - P(U_hat)||, P the orthogonal projector onto span(U_hat).
double pd_error(const Matrix& u_hat, const Matrix& u_bar, ProjectorNorm norm);

struct SurrogateParams {
  Index genes = 200;
  Index subjects = 82;
  Index clusters = 7;
  double sigma2 = 1.0;
  double rho = 0.2;
  double separation = 0.6;   ///< gene-cluster mean gap between the planted groups
  double base_hazard = 0.02;
  double hazard_ratio = 2.5;  ///< group 1 relative to group 0
  double censor_lo = 20.0;
  double censor_hi = 150.0;

  bool operator==(const SurrogateParams&) const = default;
};

/// Expression matrix with two planted subject groups and survival tied to them.
struct SurrogateDataset {
  DataMatrix expression;  ///< genes x subjects
  std::vector<std::string> gene_ids;
  std::vector<std::string> subject_ids;
  std::vector<int> groups;
  std::vector<SurvivalRecord> survival;  ///< group field holds the planted group
};

SurrogateDataset gen_survival_surrogate(const SurrogateParams& params, std::uint64_t seed);

}  // namespace mahal
