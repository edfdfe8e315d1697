#pragma once

#include "mahal/clustering.hpp"
#include "mahal/matrix_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mahal {

/// K principal directions with the eigenvalues used to whiten along them.
struct PrincipalBasis {
  Matrix directions;   ///< m x K, unit-norm columns (zero columns only when collapsed)
  Vector eigenvalues;  ///< descending, from plain PCA
  bool informed = false;
  int iterations_run = 0;
  double final_gradient_norm = 0.0;
  Index collapsed_directions = 0;      ///< columns that projected to zero
  std::vector<double> objective_trace;  ///< R after each accepted iteration, if recorded

  Index rank() const noexcept { return directions.cols(); }
};

/// Top-K eigenpairs. Throws RankDeficiencyError when K exceeds the numerical rank.
PrincipalBasis pca_top_k(const Covariance& sigma, Index k, const std::string& context = {});

/// H H^T U: cluster-wise means of every column.
Matrix project_onto_cluster_subspace(const Matrix& u, const IndicatorMatrix& h);

/// tr((I - U U^T) S (I - U U^T)^T); U need not be orthonormal.
double reconstruction_error(const Matrix& u, const Covariance& sigma);

/// -2 ((I - U U^T) S + S (I - U U^T)) U.
Matrix pca_gradient(const Matrix& u, const Covariance& sigma);

enum class StepRule { backtracking, fixed };
enum class ConstrainedRoute { reduced, full_space };

struct ConstrainedPcaOptions {
  StepRule step_rule = StepRule::backtracking;
  double fixed_step = 0.1;
  std::optional<double> grad_tol;  ///< default 1e-6 * tr(S) / m
  int max_iters = 1000;
  bool orthonormalize = false;  ///< Gram-Schmidt after normalization
  ConstrainedRoute route = ConstrainedRoute::reduced;
  bool record_trace = false;
};

/**
 * Gradient projection for PCA constrained to span(H):
 *
 *   U_l = H H^T (U_{l-1} - alpha_l grad R(U_{l-1}))
 *
 * starting from `init`. Stops when the projected gradient norm drops below
 * grad_tol, when backtracking finds no decreasing step, or after max_iters.
 * max_iters = 0 returns the normalized one-shot projection H H^T U_init.
 * Columns are normalized at the end; eigenvalues are copied from `init`.
 *
 * The reduced route iterates on V with U = H V, which is exact because
 * H^T H = I; the full-space route evaluates every quantity in R^m.
 */
PrincipalBasis constrained_pca(const Covariance& sigma, const IndicatorMatrix& h, Index k,
                               const PrincipalBasis& init,
                               const ConstrainedPcaOptions& options = {});

/// H^T S H without materializing H.
Matrix compress_covariance(const Covariance& sigma, const IndicatorMatrix& h);

}  // namespace mahal
