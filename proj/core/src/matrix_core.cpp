#include "mahal/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mahal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::insufficient_samples: return "insufficient samples";
    case ErrorCode::rank_deficiency: return "rank deficiency";
    case ErrorCode::degenerate_input: return "degenerate input";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::undefined_test: return "undefined test";
    case ErrorCode::data_error: return "data error";
  }
  return "unknown";
}

RankDeficiencyError::RankDeficiencyError(Index requested, Index attainable,
                                         const std::string& context)
    : Error(ErrorCode::rank_deficiency,
            (context.empty() ? std::string{} : context + ": ") + "requested rank " +
                std::to_string(requested) + " exceeds numerical rank; attainable rank is " +
                std::to_string(attainable)),
      requested_(requested),
      attainable_(attainable) {}

// ---------------------------------------------------------------------------
// DataMatrix

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  detail::require(values_.rows() >= 1 && values_.cols() >= 1, ErrorCode::invalid_input,
                  "data matrix must have at least one row and one column");
  detail::require(values_.allFinite(), ErrorCode::invalid_input,
                  "data matrix contains non-finite entries");
}

DataMatrix DataMatrix::select_columns(const std::vector<Index>& columns) const {
  Matrix out(rows(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    detail::require(columns[k] >= 0 && columns[k] < cols(), ErrorCode::invalid_argument,
                    "column index out of range");
    out.col(static_cast<Index>(k)) = values_.col(columns[k]);
  }
  return DataMatrix(std::move(out));
}

DataMatrix DataMatrix::leading_columns(Index count) const {
  detail::require(count >= 1 && count <= cols(), ErrorCode::invalid_argument,
                  "leading column count out of range");
  return DataMatrix(values_.leftCols(count));
}

// ---------------------------------------------------------------------------
// Covariance

Covariance Covariance::dense(const Matrix& s) {
  detail::require(s.rows() == s.cols(), ErrorCode::dimension_mismatch,
                  "covariance must be square");
  detail::require(s.allFinite(), ErrorCode::invalid_input, "covariance has non-finite entries");
  return Covariance(0.5 * (s + s.transpose()), false);
}

Covariance Covariance::factored(Matrix f) {
  detail::require(f.allFinite(), ErrorCode::invalid_input,
                  "covariance factor has non-finite entries");
  return Covariance(std::move(f), true);
}

Index Covariance::dim() const noexcept { return data_.rows(); }

double Covariance::trace() const {
  return factored_ ? data_.squaredNorm() : data_.trace();
}

Matrix Covariance::apply(const Matrix& u) const {
  detail::require(u.rows() == dim(), ErrorCode::dimension_mismatch,
                  "covariance apply: row count mismatch");
  if (factored_) return data_ * (data_.transpose() * u);
  return data_ * u;
}

Matrix Covariance::compress(const Matrix& h) const {
  detail::require(h.rows() == dim(), ErrorCode::dimension_mismatch,
                  "covariance compress: row count mismatch");
  if (factored_) {
    const Matrix hf = h.transpose() * data_;
    return hf * hf.transpose();
  }
  const Matrix c = h.transpose() * (data_ * h);
  return 0.5 * (c + c.transpose());
}

Matrix Covariance::to_dense() const {
  if (factored_) return data_ * data_.transpose();
  return data_;
}

// ---------------------------------------------------------------------------

namespace {

Matrix centered(const Matrix& d) {
  return d.colwise() - d.rowwise().mean();
}

}  // namespace

Matrix sample_covariance(const DataMatrix& d, bool center) {
  detail::require(d.cols() >= 2, ErrorCode::insufficient_samples,
                  "sample covariance needs at least 2 samples");
  const Matrix x = center ? centered(d.values()) : d.values();
  Matrix s = (x * x.transpose()) / static_cast<double>(d.cols() - 1);
  return 0.5 * (s + s.transpose());
}

Covariance sample_covariance_factor(const DataMatrix& d, bool center) {
  detail::require(d.cols() >= 2, ErrorCode::insufficient_samples,
                  "sample covariance needs at least 2 samples");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d.cols() - 1));
  return Covariance::factored((center ? centered(d.values()) : d.values()) * scale);
}

void canonicalize_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

SymmetricEVD sym_evd(const Matrix& s) {
  detail::require(s.rows() == s.cols(), ErrorCode::dimension_mismatch,
                  "sym_evd needs a square matrix");
  detail::require(s.allFinite(), ErrorCode::invalid_input, "sym_evd: non-finite entries");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  SymmetricEVD out;
  if (solver.info() == Eigen::Success) {
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  } else {
    // SVD of the Gershgorin-shifted (PSD) matrix, read as an EVD.
    const double shift = sym.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::BDCSVD<Matrix> svd(sym + shift * Matrix::Identity(sym.rows(), sym.cols()), Eigen::ComputeThinU);
    detail::require(svd.info() == Eigen::Success, ErrorCode::invalid_input,
                    "sym_evd: eigensolver did not converge");
    out.eigenvalues = svd.singularValues().array() - shift;
    out.eigenvectors = svd.matrixU();
  }
  canonicalize_signs(out.eigenvectors);
  return out;
}

Index numerical_rank(const Vector& descending_eigenvalues) {
  if (descending_eigenvalues.size() == 0) return 0;
  const double lmax = descending_eigenvalues(0);
  if (!(lmax > 0.0)) return 0;
  const double floor = kRelativeEigenFloor * lmax;
  Index r = 0;
  while (r < descending_eigenvalues.size() && descending_eigenvalues(r) > floor) ++r;
  return r;
}

SymmetricEVD top_eigenpairs(const Covariance& s, Index k) {
  detail::require(k >= 0 && k <= s.dim(), ErrorCode::invalid_argument,
                  "top_eigenpairs: k out of range");
  const Matrix& f = s.storage();
  if (!s.is_factored() || f.cols() >= f.rows()) {
    SymmetricEVD full = sym_evd(s.to_dense());
    return {full.eigenvalues.head(k), full.eigenvectors.leftCols(k)};
  }

  // S = F F^T shares its nonzero spectrum with the Gram matrix G = F^T F;
  // eigenvectors map across as u = F v / sqrt(lambda).
  SymmetricEVD gram = sym_evd(f.transpose() * f);
  const Index available = std::min<Index>(k, gram.eigenvalues.size());
  SymmetricEVD out;
  out.eigenvalues = Vector::Zero(k);
  out.eigenvectors = Matrix::Zero(f.rows(), k);
  const double floor = kRelativeEigenFloor * std::max(gram.eigenvalues(0), 0.0);
  for (Index j = 0; j < available; ++j) {
    const double lambda = gram.eigenvalues(j);
    out.eigenvalues(j) = std::max(lambda, 0.0);
    if (lambda > floor && lambda > 0.0) {
      Vector u = f * gram.eigenvectors.col(j);
      u.normalize();
      out.eigenvectors.col(j) = u;
    }
  }
  canonicalize_signs(out.eigenvectors);
  return out;
}

PsdPseudoInverse pinv_psd(const Matrix& s, RankOrFloor rank_or_floor) {
  SymmetricEVD evd = sym_evd(s);
  const Index m = s.rows();
  const double lmax = m > 0 ? std::max(evd.eigenvalues(0), 0.0) : 0.0;
  const double negative_tol = 1e-9 * std::max(1.0, lmax);
  detail::require(m == 0 || evd.eigenvalues(m - 1) >= -negative_tol, ErrorCode::invalid_input,
                  "pinv_psd: matrix is not positive semidefinite");

  PsdPseudoInverse out;
  Index rank = 0;
  if (const auto* r = std::get_if<Rank>(&rank_or_floor)) {
    detail::require(r->value >= 0 && r->value <= m, ErrorCode::invalid_argument,
                    "pinv_psd: rank out of range");
    const Index attainable = numerical_rank(evd.eigenvalues);
    if (r->value > attainable) throw RankDeficiencyError(r->value, attainable, "pinv_psd");
    rank = r->value;
    out.floor = kRelativeEigenFloor * lmax;
  } else {
    const double rel = std::get<RelativeFloor>(rank_or_floor).value;
    detail::require(rel >= 0.0, ErrorCode::invalid_argument, "pinv_psd: negative floor");
    out.floor = rel * lmax;
    while (rank < m && evd.eigenvalues(rank) > out.floor && evd.eigenvalues(rank) > 0.0) ++rank;
  }
  out.rank = rank;
  out.factor = evd.eigenvectors.leftCols(rank) *
               evd.eigenvalues.head(rank).cwiseSqrt().cwiseInverse().asDiagonal();
  return out;
}

PseudoInverseCheck check_pseudoinverse_properties(const Matrix& s, const Matrix& sdag,
                                                  double tolerance) {
  detail::require(s.rows() == s.cols() && sdag.rows() == sdag.cols() && s.rows() == sdag.rows(),
                  ErrorCode::dimension_mismatch,
                  "check_pseudoinverse_properties: square matrices of equal size required");
  const Matrix ssd = s * sdag;
  const Matrix sds = sdag * s;
  PseudoInverseCheck out;
  out.residuals[0] = (ssd * s - s).norm();
  out.residuals[1] = (sds * sdag - sdag).norm();
  out.residuals[2] = (ssd.transpose() - ssd).norm();
  out.residuals[3] = (sds.transpose() - sds).norm();
  const std::array<double, 4> scale = {s.norm(), sdag.norm(), ssd.norm(), sds.norm()};
  for (std::size_t i = 0; i < 4; ++i) {
    out.passed[i] = out.residuals[i] <= tolerance * std::max(scale[i], 1e-300);
  }
  return out;
}

}  // namespace mahal
