#include "mahal/embedding.hpp"

#include <algorithm>
#include <cmath>

namespace mahal {
namespace {

constexpr double kTrivialTol = 1e-9;

void require_square_symmetric(const Matrix& a, const char* what) {
  detail::require(a.rows() == a.cols() && a.rows() >= 1, ErrorCode::dimension_mismatch,
                  std::string(what) + ": square matrix required");
  detail::require(a.allFinite(), ErrorCode::invalid_input,
                  std::string(what) + ": non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  detail::require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
                  ErrorCode::invalid_input, std::string(what) + ": matrix is not symmetric");
}

bool constant_sign(const Vector& v) {
  return (v.array() > 0.0).all() || (v.array() < 0.0).all();
}

}  // namespace

Matrix gaussian_affinity(const Matrix& dist2, double eps) {
  detail::require(eps > 0.0 && std::isfinite(eps), ErrorCode::invalid_argument,
                  "gaussian_affinity: eps must be > 0");
  require_square_symmetric(dist2, "gaussian_affinity");
  detail::require(dist2.minCoeff() >= 0.0, ErrorCode::invalid_input,
                  "gaussian_affinity: negative squared distance");
  return (-dist2.array() / eps).exp().matrix();
}

double median_scale(const Matrix& dist2, double multiplier) {
  detail::require(dist2.rows() == dist2.cols(), ErrorCode::dimension_mismatch,
                  "median_scale: square matrix required");
  detail::require(dist2.rows() >= 2, ErrorCode::insufficient_samples,
                  "median_scale: need at least 2 points");
  detail::require(multiplier > 0.0, ErrorCode::invalid_argument,
                  "median_scale: multiplier must be > 0");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(dist2.rows() * (dist2.rows() - 1) / 2));
  for (Index j = 0; j < dist2.cols(); ++j)
    for (Index i = j + 1; i < dist2.rows(); ++i) v.push_back(dist2(i, j));
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double median = v[mid];
  if (v.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  detail::require(median > 0.0, ErrorCode::degenerate_input,
                  "median_scale: median pairwise distance is zero");
  return multiplier * median;
}

Matrix transition_matrix(const Matrix& affinity) {
  require_square_symmetric(affinity, "transition_matrix");
  const Vector s = affinity.rowwise().sum();
  detail::require(s.minCoeff() > 0.0, ErrorCode::invalid_input,
                  "transition_matrix: a row of the affinity sums to zero");
  return s.cwiseInverse().asDiagonal() * affinity;
}

Embedding diffusion_map(const Matrix& affinity, Index q) {
  require_square_symmetric(affinity, "diffusion_map");
  const Index n = affinity.rows();
  detail::require(q >= 1 && q <= n - 1, ErrorCode::invalid_argument,
                  "diffusion_map: q must be in [1, n-1]");
  detail::require(affinity.minCoeff() >= 0.0, ErrorCode::invalid_input,
                  "diffusion_map: negative affinity");
  const Vector s = affinity.rowwise().sum();
  detail::require(s.minCoeff() > 0.0, ErrorCode::invalid_input,
                  "diffusion_map: a row of the affinity sums to zero");
  const Vector isq = s.cwiseSqrt().cwiseInverse();
  const SymmetricEVD evd = sym_evd(isq.asDiagonal() * affinity * isq.asDiagonal());

  Index trivial = -1;
  Index unit_count = 0;
  for (Index j = 0; j < n; ++j) {
    if (std::abs(evd.eigenvalues(j) - 1.0) >= kTrivialTol) continue;
    ++unit_count;
    if (trivial < 0 && constant_sign(evd.eigenvectors.col(j))) trivial = j;
  }
  if (trivial < 0) trivial = 0;

  Embedding out;
  out.disconnected = unit_count > 1;
  out.coordinates.resize(n, q);
  out.eigenvalues.resize(q);
  Index col = 0;
  for (Index j = 0; j < n && col < q; ++j) {
    if (j == trivial) continue;
    out.eigenvalues(col) = evd.eigenvalues(j);
    out.coordinates.col(col) = evd.eigenvalues(j) * isq.cwiseProduct(evd.eigenvectors.col(j));
    ++col;
  }
  return out;
}

Embedding diffusion_map_from_distances(const Matrix& dist2, Index q, double multiplier) {
  const double eps = median_scale(dist2, multiplier);
  Embedding out = diffusion_map(gaussian_affinity(dist2, eps), q);
  out.eps = eps;
  return out;
}

Bipartition spectral_bipartition(const Embedding& embedding) {
  detail::require(embedding.dims() >= 1, ErrorCode::invalid_argument,
                  "spectral_bipartition: embedding has no coordinates");
  Bipartition out;
  out.labels.resize(static_cast<std::size_t>(embedding.size()));
  for (Index i = 0; i < embedding.size(); ++i)
    out.labels[static_cast<std::size_t>(i)] = embedding.coordinates(i, 0) < 0.0 ? 0 : 1;
  out.single_group = std::all_of(out.labels.begin(), out.labels.end(),
                                 [&](int l) { return l == out.labels.front(); });
  return out;
}

}  // namespace mahal
