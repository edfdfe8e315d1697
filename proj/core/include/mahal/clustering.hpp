#pragma once

#include "mahal/matrix_core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mahal {

struct KMeansOptions {
  Index clusters = 2;
  std::uint64_t seed = 0;
  int restarts = 20;
  int max_iters = 300;
  /// Candidates drawn per k-means++ step; 0 picks 2 + floor(ln K), 1 is classic k-means++.
  int seeding_trials = 0;
};

/// Result of k-means over the rows of a matrix.
struct ClusterAssignment {
  std::vector<Index> labels;   ///< per-row cluster index
  std::vector<Index> sizes;    ///< per-cluster counts, all >= 1
  Matrix centroids;            ///< clusters x p
  double cost = 0.0;           ///< sum of squared row-to-centroid distances
  std::vector<double> cost_history;  ///< cost after each Lloyd iteration of the winning run
  int iterations = 0;

  Index clusters() const noexcept { return static_cast<Index>(sizes.size()); }
};

/**
 * Lloyd's k-means over the rows of `rows` (m points in R^p), seeded with
 * greedy k-means++ and repeated `restarts` times; the lowest-cost run wins.
 *
 * A cluster that empties during an update is re-seeded at the point farthest
 * from its current centroid, so every returned cluster is non-empty.
 * Bit-reproducible for a fixed seed.
 */
ClusterAssignment kmeans(const Matrix& rows, const KMeansOptions& options);

/// Sum of squared distances of each row to the mean of its cluster.
double within_cluster_cost(const Matrix& rows, const std::vector<Index>& labels, Index clusters);

/**
 * Orthonormal cluster indicator H (m x K_c): H(j, k) = 1/sqrt(m_k) when row j
 * belongs to cluster k, zero otherwise.
 *
 * Products with H are evaluated through cluster sums, never through the dense
 * matrix.
 */
class IndicatorMatrix {
 public:
  IndicatorMatrix(std::vector<Index> labels, Index clusters);
  explicit IndicatorMatrix(const ClusterAssignment& assignment)
      : IndicatorMatrix(assignment.labels, assignment.clusters()) {}

  /// Every row its own cluster; H = I.
  static IndicatorMatrix singletons(Index m);

  Index rows() const noexcept { return static_cast<Index>(labels_.size()); }
  Index clusters() const noexcept { return static_cast<Index>(sizes_.size()); }
  const std::vector<Index>& labels() const noexcept { return labels_; }
  const std::vector<Index>& sizes() const noexcept { return sizes_; }

  Matrix dense() const;
  Matrix compress(const Matrix& u) const;  ///< H^T U
  Matrix expand(const Matrix& v) const;    ///< H V
  Matrix project(const Matrix& u) const;   ///< H H^T U (cluster-wise means)

 private:
  std::vector<Index> labels_;
  std::vector<Index> sizes_;
  Vector inv_sqrt_sizes_;
};

struct GapResult {
  double gap = 0.0;
  double log_dispersion = 0.0;            ///< log W_K of the data
  double reference_mean = 0.0;            ///< E*[log W_K]
  double reference_sd = 0.0;              ///< sd of the reference log W_K
  double standard_error = 0.0;            ///< sd * sqrt(1 + 1/B)
};

struct GapOptions {
  Index clusters = 2;
  std::uint64_t seed = 0;
  int references = 10;
  int restarts = 1;
  int max_iters = 300;
};

/**
 * Gap statistic: mean log W_K over uniform reference sets drawn in the bounding
 * box of the rows, minus log W_K of the rows themselves. W_K is the pooled
 * within-cluster sum of squares of the best k-means run.
 */
GapResult gap_statistic(const Matrix& rows, const GapOptions& options);

struct PlateauRange {
  std::size_t first = 0;  ///< index into the scanned grid
  std::size_t last = 0;
};

/**
 * Finds where a curve sampled at increasing `x` stops increasing.
 *
 * After the steepest forward slope, the plateau starts at the first grid point
 * whose forward slope falls below `fraction` of that maximum and extends while
 * the slope stays below it. Returns nothing for fewer than two points or a curve
 * that never rises.
 */
std::optional<PlateauRange> detect_plateau(const std::vector<double>& x,
                                           const std::vector<double>& y, double fraction = 0.1);

}  // namespace mahal
