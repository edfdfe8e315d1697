#pragma once

#include "mahal/matrix_core.hpp"

#include <vector>

namespace mahal {

struct Embedding {
  Matrix coordinates;  ///< n x q, column j is lambda_j * phi_j
  Vector eigenvalues;  ///< descending, trivial eigenvalue excluded
  double eps = 0.0;    ///< kernel scale, 0 when built from a raw affinity
  bool disconnected = false;  ///< eigenvalue 1 has numerical multiplicity > 1

  Index size() const noexcept { return coordinates.rows(); }
  Index dims() const noexcept { return coordinates.cols(); }
};

/// W_ij = exp(-d2_ij / eps).
Matrix gaussian_affinity(const Matrix& dist2, double eps);

/// multiplier * median of the off-diagonal squared distances.
double median_scale(const Matrix& dist2, double multiplier = 1.0);

/// P = S^{-1} W with S the diagonal of row sums.
Matrix transition_matrix(const Matrix& affinity);

/**
 * Diffusion maps from a symmetric affinity. The eigenproblem of P is solved
 * through S^{-1/2} W S^{-1/2}; the trivial pair (eigenvalue within 1e-9 of 1,
 * constant-sign eigenvector) is dropped and the next q are kept.
 */
Embedding diffusion_map(const Matrix& affinity, Index q);

/// Gaussian kernel at eps = multiplier * median(d2), then diffusion_map.
Embedding diffusion_map_from_distances(const Matrix& dist2, Index q, double multiplier = 1.0);

struct Bipartition {
  std::vector<int> labels;  ///< 0 where coordinate 1 < 0, else 1
  bool single_group = false;
};

Bipartition spectral_bipartition(const Embedding& embedding);

}  // namespace mahal
