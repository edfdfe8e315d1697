#include "mahal/synthgen.hpp"

#include "mahal/clustering.hpp"
#include "mahal/random.hpp"

#include <cmath>
#include <cstdio>

namespace mahal {
namespace {

std::vector<Index> equal_split(Index m, Index k) {
  std::vector<Index> sizes(static_cast<std::size_t>(k), m / k);
  sizes.back() += m - (m / k) * k;
  return sizes;
}

std::vector<Index> contiguous_labels(const std::vector<Index>& sizes) {
  std::vector<Index> labels;
  for (std::size_t k = 0; k < sizes.size(); ++k)
    labels.insert(labels.end(), static_cast<std::size_t>(sizes[k]), static_cast<Index>(k));
  return labels;
}

// Orthonormal basis of span(U); U itself when already orthonormal.
Matrix orthonormal_span(const Matrix& u) {
  const Matrix gram = u.transpose() * u;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8) return u;
  const SymmetricEVD evd = sym_evd(gram);
  const double floor = 1e-10 * std::max(evd.eigenvalues.size() ? evd.eigenvalues(0) : 0.0, 0.0);
  Index r = 0;
  while (r < evd.eigenvalues.size() && evd.eigenvalues(r) > floor && evd.eigenvalues(r) > 0.0) ++r;
  return u * evd.eigenvectors.leftCols(r) *
         evd.eigenvalues.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
}

std::string padded_id(char prefix, Index i, Index count) {
  const int width = static_cast<int>(std::to_string(count).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*ld", prefix, width, static_cast<long>(i + 1));
  return buf;
}

}  // namespace

LinearModelDataset gen_linear_model(Index n, std::uint64_t seed, Index rows_per_block) {
  detail::require(n >= 1, ErrorCode::invalid_argument, "gen_linear_model: n must be >= 1");
  detail::require(rows_per_block >= 1, ErrorCode::invalid_argument,
                  "gen_linear_model: rows per block must be >= 1");
  const double means[3][2] = {{1.0 / 3.0, 1.0}, {1.0 / 3.0, -1.0}, {-1.0, -3.0}};
  const Index m = 3 * rows_per_block;

  Rng rng_a(derive_seed(seed, {0}));
  std::normal_distribution<double> noise(0.0, 0.1);
  Matrix a(m, 2);
  std::vector<int> blocks(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const int b = static_cast<int>(i / rows_per_block);
    blocks[static_cast<std::size_t>(i)] = b + 1;
    for (int t = 0; t < 2; ++t) a(i, t) = means[b][t] + noise(rng_a);
  }

  Rng rng_x(derive_seed(seed, {1}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(2, n);
  for (Index j = 0; j < n; ++j)
    for (int t = 0; t < 2; ++t) x(t, j) = unit(rng_x);

  return LinearModelDataset{DataMatrix(a * x), std::move(x), std::move(a), std::move(blocks)};
}

Matrix linear_model_covariance(const Matrix& mixing) {
  return mixing * mixing.transpose() / 12.0;
}

BlockModelDataset gen_block_model(const BlockModelParams& p, std::uint64_t seed) {
  detail::require(p.m >= 1 && p.n >= 1, ErrorCode::invalid_argument,
                  "gen_block_model: m and n must be >= 1");
  detail::require(p.clusters >= 1 && p.clusters <= p.m, ErrorCode::invalid_argument,
                  "gen_block_model: cluster count must be in [1, m]");
  detail::require(p.sigma2 > 0.0 && p.rho >= 0.0 && p.rho < p.sigma2, ErrorCode::invalid_argument,
                  "gen_block_model: need 0 <= rho < sigma2");
  detail::require(p.type_b_prob >= 0.0 && p.type_b_prob <= 1.0, ErrorCode::invalid_argument,
                  "gen_block_model: type probability must be in [0, 1]");
  detail::require(p.offset_lo <= p.offset_hi, ErrorCode::invalid_argument,
                  "gen_block_model: offset range is empty");
  const Index k = p.clusters;

  BlockModelDataset out{DataMatrix(Matrix::Zero(1, 1)), {}, {}, {}, {}, {}, p};
  out.cluster_sizes = equal_split(p.m, k);
  out.row_clusters = contiguous_labels(out.cluster_sizes);

  Rng rng_mu(derive_seed(seed, {0}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> offset(p.offset_lo, p.offset_hi);
  if (p.mean_a) {
    detail::require(p.mean_a->size() == k, ErrorCode::dimension_mismatch,
                    "gen_block_model: mean_a needs one entry per cluster");
    out.mean_a = *p.mean_a;
  } else {
    out.mean_a.resize(k);
    for (Index c = 0; c < k; ++c) out.mean_a(c) = unit(rng_mu);
  }
  if (p.mean_b) {
    detail::require(p.mean_b->size() == k, ErrorCode::dimension_mismatch,
                    "gen_block_model: mean_b needs one entry per cluster");
    out.mean_b = *p.mean_b;
  } else {
    out.mean_b.resize(k);
    for (Index c = 0; c < k; ++c) out.mean_b(c) = out.mean_a(c) + (c % 2 == 0 ? 1.0 : -1.0) * offset(rng_mu);
  }

  Rng rng_type(derive_seed(seed, {1}));
  std::bernoulli_distribution type_b(p.type_b_prob);
  out.types.resize(static_cast<std::size_t>(p.n));
  for (auto& t : out.types) t = type_b(rng_type) ? 1 : 0;

  Rng rng_z(derive_seed(seed, {2}));
  std::normal_distribution<double> z(0.0, 1.0);
  const double shared = std::sqrt(p.rho);
  const double own = std::sqrt(p.sigma2 - p.rho);
  Matrix d(p.m, p.n);
  Vector zc(k);
  for (Index j = 0; j < p.n; ++j) {
    for (Index c = 0; c < k; ++c) zc(c) = z(rng_z);
    const Vector& mu = out.types[static_cast<std::size_t>(j)] ? out.mean_b : out.mean_a;
    for (Index i = 0; i < p.m; ++i) {
      const Index c = out.row_clusters[static_cast<std::size_t>(i)];
      d(i, j) = mu(c) + shared * zc(c) + own * z(rng_z);
    }
  }
  out.d = DataMatrix(std::move(d));
  return out;
}

Matrix block_model_covariance(const BlockModelDataset& data) {
  const auto& p = data.params;
  const double w = p.type_b_prob * (1.0 - p.type_b_prob);
  Vector delta(p.m);
  for (Index i = 0; i < p.m; ++i) {
    const Index c = data.row_clusters[static_cast<std::size_t>(i)];
    delta(i) = data.mean_b(c) - data.mean_a(c);
  }
  Matrix sigma = w * delta * delta.transpose();
  for (Index i = 0; i < p.m; ++i)
    for (Index j = 0; j < p.m; ++j) {
      if (i == j) {
        sigma(i, j) += p.sigma2;
      } else if (data.row_clusters[static_cast<std::size_t>(i)] ==
                 data.row_clusters[static_cast<std::size_t>(j)]) {
        sigma(i, j) += p.rho;
      }
    }
  return sigma;
}

PrincipalBasis block_model_principal_directions(const BlockModelDataset& data, Index k) {
  const auto& p = data.params;
  detail::require(k >= 1 && k <= p.clusters, ErrorCode::invalid_argument,
                  "block_model_principal_directions: K must be in [1, clusters]");
  const double w = p.type_b_prob * (1.0 - p.type_b_prob);
  // H^T Sigma H = diag(sigma2 + (m_k - 1) rho) + w g g^T, g_k = sqrt(m_k) delta_k
  Matrix sh = Matrix::Zero(p.clusters, p.clusters);
  Vector g(p.clusters);
  for (Index c = 0; c < p.clusters; ++c) {
    const double mk = static_cast<double>(data.cluster_sizes[static_cast<std::size_t>(c)]);
    sh(c, c) = p.sigma2 + (mk - 1.0) * p.rho;
    g(c) = std::sqrt(mk) * (data.mean_b(c) - data.mean_a(c));
  }
  sh += w * g * g.transpose();
  const SymmetricEVD evd = sym_evd(sh);
  // Outside span(H) every eigenvalue equals sigma2 - rho.
  const double outside = p.sigma2 - p.rho;
  detail::require(evd.eigenvalues(k - 1) > outside * (1.0 + 1e-9), ErrorCode::degenerate_input,
                  "block_model_principal_directions: top-K eigenspace is not unique");
  const IndicatorMatrix h(data.row_clusters, p.clusters);
  PrincipalBasis out;
  out.directions = h.expand(evd.eigenvectors.leftCols(k));
  canonicalize_signs(out.directions);
  out.eigenvalues = evd.eigenvalues.head(k);
  return out;
}

double pd_error(const Matrix& u_hat, const Matrix& u_bar, ProjectorNorm norm) {
  detail::require(u_hat.rows() == u_bar.rows() && u_hat.cols() == u_bar.cols(),
                  ErrorCode::dimension_mismatch, "pd_error: bases must have the same shape");
  const Matrix q1 = orthonormal_span(u_bar);
  const Matrix q2 = orthonormal_span(u_hat);
  if (norm == ProjectorNorm::frobenius) {
    // ||P1 - P2||_F^2 = ||(I - P1) Q2||_F^2 + ||(I - P2) Q1||_F^2
    const Matrix r2 = q2 - q1 * (q1.transpose() * q2);
    const Matrix r1 = q1 - q2 * (q2.transpose() * q1);
    return std::sqrt(r1.squaredNorm() + r2.squaredNorm());
  }
  Matrix both(q1.rows(), q1.cols() + q2.cols());
  both << q1, q2;
  const Matrix z = orthonormal_span(both);
  const Matrix a = z.transpose() * q1;
  const Matrix b = z.transpose() * q2;
  const SymmetricEVD evd = sym_evd(a * a.transpose() - b * b.transpose());
  return evd.eigenvalues.size() ? evd.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
}

SurrogateDataset gen_survival_surrogate(const SurrogateParams& p, std::uint64_t seed) {
  detail::require(p.genes >= 1 && p.subjects >= 2, ErrorCode::invalid_argument,
                  "gen_survival_surrogate: need >= 1 gene and >= 2 subjects");
  detail::require(p.clusters >= 1 && p.clusters <= p.genes, ErrorCode::invalid_argument,
                  "gen_survival_surrogate: cluster count must be in [1, genes]");
  detail::require(p.sigma2 > 0.0 && p.rho >= 0.0 && p.rho < p.sigma2, ErrorCode::invalid_argument,
                  "gen_survival_surrogate: need 0 <= rho < sigma2");
  detail::require(p.base_hazard > 0.0 && p.hazard_ratio > 0.0, ErrorCode::invalid_argument,
                  "gen_survival_surrogate: hazards must be > 0");
  detail::require(p.censor_lo >= 0.0 && p.censor_lo <= p.censor_hi, ErrorCode::invalid_argument,
                  "gen_survival_surrogate: invalid censoring window");

  const std::vector<Index> labels = contiguous_labels(equal_split(p.genes, p.clusters));

  Rng rng_g(derive_seed(seed, {0}));
  std::bernoulli_distribution coin(0.5);
  std::vector<int> groups(static_cast<std::size_t>(p.subjects));
  for (auto& g : groups) g = coin(rng_g) ? 1 : 0;

  Rng rng_mu(derive_seed(seed, {1}));
  std::normal_distribution<double> z(0.0, 1.0);
  Vector base(p.clusters), half_gap(p.clusters);
  for (Index c = 0; c < p.clusters; ++c) {
    base(c) = z(rng_mu);
    half_gap(c) = 0.5 * p.separation * (coin(rng_mu) ? 1.0 : -1.0);
  }

  Rng rng_z(derive_seed(seed, {2}));
  const double shared = std::sqrt(p.rho);
  const double own = std::sqrt(p.sigma2 - p.rho);
  Matrix d(p.genes, p.subjects);
  Vector zc(p.clusters);
  for (Index j = 0; j < p.subjects; ++j) {
    const double sign = groups[static_cast<std::size_t>(j)] ? 1.0 : -1.0;
    for (Index c = 0; c < p.clusters; ++c) zc(c) = z(rng_z);
    for (Index i = 0; i < p.genes; ++i) {
      const Index c = labels[static_cast<std::size_t>(i)];
      d(i, j) = base(c) + sign * half_gap(c) + shared * zc(c) + own * z(rng_z);
    }
  }

  Rng rng_t(derive_seed(seed, {3}));
  std::uniform_real_distribution<double> censor(p.censor_lo, p.censor_hi);
  SurrogateDataset out{DataMatrix(std::move(d)), {}, {}, groups, {}};
  for (Index j = 0; j < p.subjects; ++j) {
    const int g = groups[static_cast<std::size_t>(j)];
    std::exponential_distribution<double> death(p.base_hazard * (g ? p.hazard_ratio : 1.0));
    const double t = death(rng_t);
    const double c = censor(rng_t);
    out.survival.push_back(SurvivalRecord{std::min(t, c), t <= c, g});
    out.subject_ids.push_back(padded_id('S', j, p.subjects));
  }
  for (Index i = 0; i < p.genes; ++i) out.gene_ids.push_back(padded_id('G', i, p.genes));
  return out;
}

}  // namespace mahal
