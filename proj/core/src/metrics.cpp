#include "mahal/metrics.hpp"

#include "mahal/parallel.hpp"
#include "mahal/random.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mahal {
namespace {

Matrix whitening_factor(const PrincipalBasis& basis) {
  return basis.directions * basis.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
}

Covariance covariance_of(const DataMatrix& d, bool center) {
  if (d.cols() <= d.rows()) return sample_covariance_factor(d, center);
  return Covariance::dense(sample_covariance(d, center));
}

}  // namespace

GlobalMetricModel fit_global_from_covariance(const Covariance& sigma,
                                             const GlobalFitOptions& options) {
  GlobalMetricModel model;
  PrincipalBasis plain = pca_top_k(sigma, options.rank, "fit_global");
  if (options.informed) {
    detail::require(options.indicator.has_value(), ErrorCode::invalid_argument,
                    "fit_global: informed mode needs a row clustering");
    model.basis = constrained_pca(sigma, *options.indicator, options.rank, plain,
                                  options.constrained);
    model.informed = true;
  } else {
    model.basis = std::move(plain);
  }
  model.factor = whitening_factor(model.basis);
  return model;
}

GlobalMetricModel fit_global(const DataMatrix& d, const GlobalFitOptions& options) {
  detail::require(d.cols() >= 2, ErrorCode::insufficient_samples,
                  "fit_global: need at least 2 samples");
  const Covariance sigma = covariance_of(d, options.center);
  if (!options.informed || options.indicator) return fit_global_from_covariance(sigma, options);

  const Index kc = options.clusters.value_or(options.rank + 1);
  detail::require(kc >= 1 && kc <= d.rows(), ErrorCode::invalid_argument,
                  "fit_global: cluster count must be in [1, m]");
  KMeansOptions km = options.kmeans;
  km.clusters = kc;
  ClusterAssignment rows = kmeans(d.values(), km);
  GlobalFitOptions with_h = options;
  with_h.indicator.emplace(rows);
  GlobalMetricModel model = fit_global_from_covariance(sigma, with_h);
  model.row_clusters = std::move(rows);
  return model;
}

double global_distance(const GlobalMetricModel& model, const Vector& c1, const Vector& c2) {
  detail::require(c1.size() == model.dim() && c2.size() == model.dim(),
                  ErrorCode::dimension_mismatch, "global_distance: vector length mismatch");
  return (model.factor.transpose() * (c1 - c2)).squaredNorm();
}

Matrix distance_matrix(const GlobalMetricModel& model, const DataMatrix& d) {
  detail::require(d.rows() == model.dim(), ErrorCode::dimension_mismatch,
                  "distance_matrix: data rows differ from model dimension");
  const Matrix y = model.factor.transpose() * d.values();
  const Index n = d.cols();
  Matrix out = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = (y.col(i) - y.col(j)).squaredNorm();
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

std::vector<Index> nearest_columns(const DataMatrix& d, Index i, Index count) {
  detail::require(i >= 0 && i < d.cols(), ErrorCode::invalid_argument,
                  "nearest_columns: column index out of range");
  detail::require(count >= 1 && count <= d.cols(), ErrorCode::invalid_argument,
                  "nearest_columns: count must be in [1, n]");
  const Vector dist = (d.values().colwise() - d.values().col(i)).colwise().squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(d.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return dist(a) < dist(b); });
  // The column itself is at distance zero; keep it first even against duplicates.
  auto self = std::find(order.begin(), order.end(), i);
  std::rotate(order.begin(), self, self + 1);
  order.resize(static_cast<std::size_t>(count));
  return order;
}

LocalMetricModel fit_local(const DataMatrix& d, const LocalFitOptions& options) {
  const Index m = d.rows();
  const Index n = d.cols();
  const Index big_n = options.neighbors;
  detail::require(big_n >= 2 && big_n <= n, ErrorCode::invalid_argument,
                  "fit_local: neighborhood size must be in [2, n]");
  detail::require(options.rank >= 1 && options.rank <= std::min(m, big_n - 1),
                  ErrorCode::invalid_argument, "fit_local: rank must be in [1, min(m, N-1)]");
  detail::require(!options.informed || (options.clusters >= 1 && options.clusters <= m),
                  ErrorCode::invalid_argument, "fit_local: cluster count must be in [1, m]");

  LocalMetricModel model;
  model.neighbors = big_n;
  model.rank = options.rank;
  model.informed = options.informed;
  model.factors.resize(static_cast<std::size_t>(n));
  model.neighborhoods.resize(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t slot) {
    const Index i = static_cast<Index>(slot);
    std::vector<Index> nb = nearest_columns(d, i, big_n);
    const DataMatrix patch = d.select_columns(nb);
    const Covariance sigma = sample_covariance_factor(patch, true);
    PrincipalBasis basis;
    try {
      basis = pca_top_k(sigma, options.rank);
    } catch (const RankDeficiencyError& e) {
      throw RankDeficiencyError(e.requested(), e.attainable(),
                                "fit_local: column " + std::to_string(i));
    }
    if (options.informed) {
      KMeansOptions km;
      km.clusters = options.clusters;
      km.seed = derive_seed(options.seed, {static_cast<std::uint64_t>(i)});
      km.restarts = options.kmeans_restarts;
      km.max_iters = options.kmeans_max_iters;
      const IndicatorMatrix h(kmeans(patch.values(), km));
      basis = constrained_pca(sigma, h, options.rank, basis, options.constrained);
    }
    model.factors[slot] = whitening_factor(basis);
    model.neighborhoods[slot] = std::move(nb);
  });
  return model;
}

double local_distance(const LocalMetricModel& model, Index i, Index j, const DataMatrix& d) {
  detail::require(i >= 0 && j >= 0 && i < model.size() && j < model.size() && model.size() == d.cols(),
                  ErrorCode::invalid_argument, "local_distance: index out of range");
  if (i == j) return 0.0;
  const Vector diff = d.col(i) - d.col(j);
  return 0.5 * ((model.factors[static_cast<std::size_t>(i)].transpose() * diff).squaredNorm() +
                (model.factors[static_cast<std::size_t>(j)].transpose() * diff).squaredNorm());
}

Matrix distance_matrix(const LocalMetricModel& model, const DataMatrix& d) {
  detail::require(model.size() == d.cols(), ErrorCode::dimension_mismatch,
                  "distance_matrix: model was fitted on a different number of columns");
  const Index n = d.cols();
  // q(i, j) = ||W_i^T (c_j - c_i)||^2
  Matrix q(n, n);
  for (Index i = 0; i < n; ++i) {
    const Matrix y = model.factors[static_cast<std::size_t>(i)].transpose() *
                     (d.values().colwise() - d.values().col(i));
    q.row(i) = y.colwise().squaredNorm();
  }
  Matrix out = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = 0.5 * (q(i, j) + q(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

}  // namespace mahal
