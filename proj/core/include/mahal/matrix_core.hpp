#pragma once

#include "mahal/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <variant>
#include <vector>

namespace mahal {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * Dense m x n data matrix whose columns are samples and rows are coordinates.
 *
 * Construction validates the shape (m, n >= 1) and that every entry is finite,
 * so downstream code never needs to re-check.
 */
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values);

  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }
  auto col(Index j) const { return values_.col(j); }

  /// Sub-matrix made of the given columns, in order.
  DataMatrix select_columns(const std::vector<Index>& columns) const;
  DataMatrix leading_columns(Index count) const;

 private:
  Matrix values_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
struct SymmetricEVD {
  Vector eigenvalues;
  Matrix eigenvectors;  // columns, same order as eigenvalues
};

/**
 * A covariance matrix held either densely or as a factor F with S = F F^T.
 *
 * The factored form comes from sample covariances of short, wide data
 * (n samples << m coordinates); every operation below then costs O(m n)
 * instead of O(m^2).
 */
class Covariance {
 public:
  /// Dense form; the input is symmetrized as (S + S^T) / 2.
  static Covariance dense(const Matrix& s);
  /// Low-rank form S = F F^T.
  static Covariance factored(Matrix f);

  Index dim() const noexcept;
  bool is_factored() const noexcept { return factored_; }
  double trace() const;
  Matrix apply(const Matrix& u) const;  ///< S U
  Matrix compress(const Matrix& h) const;  ///< H^T S H
  Matrix to_dense() const;
  const Matrix& storage() const noexcept { return data_; }

 private:
  Covariance(Matrix data, bool factored) : data_(std::move(data)), factored_(factored) {}

  Matrix data_;
  bool factored_ = false;
};

/// W with pinv(S) = W W^T; W = U_K diag(lambda_K)^{-1/2}.
struct PsdPseudoInverse {
  Matrix factor;
  Index rank = 0;
  double floor = 0.0;  ///< absolute eigenvalue floor that was applied

  Matrix materialize() const { return factor * factor.transpose(); }
};

struct Rank {
  Index value;
};
struct RelativeFloor {
  double value = 1e-12;
};
using RankOrFloor = std::variant<Rank, RelativeFloor>;

/// Residual norms of the four Moore-Penrose identities.
struct PseudoInverseCheck {
  std::array<double, 4> residuals{};
  std::array<bool, 4> passed{};

  bool all_passed() const noexcept {
    return passed[0] && passed[1] && passed[2] && passed[3];
  }
};

inline constexpr double kRelativeEigenFloor = 1e-12;
inline constexpr double kPseudoInverseTolerance = 1e-7;

/// D D^T / (n - 1), optionally after subtracting the mean column.
Matrix sample_covariance(const DataMatrix& d, bool center = true);

/// Same estimate as a factor F = (D - mean) / sqrt(n - 1).
Covariance sample_covariance_factor(const DataMatrix& d, bool center = true);

/**
 * Full symmetric eigendecomposition, eigenvalues descending.
 *
 * The input is symmetrized first. Each eigenvector is signed so that its
 * largest-magnitude entry is positive (first such entry on ties).
 */
SymmetricEVD sym_evd(const Matrix& s);

/// Leading `k` eigenpairs; factored covariances go through the Gram matrix.
SymmetricEVD top_eigenpairs(const Covariance& s, Index k);

/// Number of eigenvalues above kRelativeEigenFloor * lambda_max.
Index numerical_rank(const Vector& descending_eigenvalues);

PsdPseudoInverse pinv_psd(const Matrix& s, RankOrFloor rank_or_floor = RelativeFloor{});

PseudoInverseCheck check_pseudoinverse_properties(const Matrix& s, const Matrix& sdag,
                                                  double tolerance = kPseudoInverseTolerance);

/// Flips each column so its largest-magnitude entry is positive.
void canonicalize_signs(Matrix& vectors);

}  // namespace mahal
