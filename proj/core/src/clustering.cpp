#include "mahal/clustering.hpp"

#include "mahal/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mahal {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double squared_distance(const double* a, const double* b, Index p) {
  double s = 0.0;
  for (Index t = 0; t < p; ++t) {
    const double d = a[t] - b[t];
    s += d * d;
  }
  return s;
}

struct LloydRun {
  std::vector<Index> labels;
  RowMatrix centroids;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  int iterations = 0;
};

Index sample_by_weight(const std::vector<double>& w, double total, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, total);
  const double target = u(rng);
  double running = 0.0;
  Index pick = -1;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0.0) continue;
    running += w[j];
    pick = static_cast<Index>(j);
    if (running > target) break;
  }
  return pick;
}

RowMatrix plus_plus_seeds(const RowMatrix& x, Index k, int trials, Rng& rng) {
  const Index m = x.rows();
  const Index p = x.cols();
  RowMatrix centroids(k, p);
  std::vector<char> chosen(static_cast<std::size_t>(m), 0);
  std::vector<double> d2(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  std::vector<double> cand_d2(static_cast<std::size_t>(m));
  std::vector<double> best_d2(static_cast<std::size_t>(m));

  auto take = [&](Index c, Index i) {
    chosen[static_cast<std::size_t>(i)] = 1;
    centroids.row(c) = x.row(i);
    for (Index j = 0; j < m; ++j) {
      d2[static_cast<std::size_t>(j)] = std::min(
          d2[static_cast<std::size_t>(j)], squared_distance(x.row(j).data(), x.row(i).data(), p));
    }
  };

  std::uniform_int_distribution<Index> first(0, m - 1);
  take(0, first(rng));
  for (Index c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Index pick = -1;
    if (total > 0.0) {
      // Greedy variant: draw several candidates, keep the one that lowers the
      // potential most.
      double best_potential = std::numeric_limits<double>::infinity();
      for (int t = 0; t < trials; ++t) {
        const Index cand = sample_by_weight(d2, total, rng);
        if (cand < 0) continue;
        double potential = 0.0;
        for (Index j = 0; j < m; ++j) {
          const double d = std::min(d2[static_cast<std::size_t>(j)],
                                    squared_distance(x.row(j).data(), x.row(cand).data(), p));
          cand_d2[static_cast<std::size_t>(j)] = d;
          potential += d;
        }
        if (potential < best_potential) {
          best_potential = potential;
          pick = cand;
          best_d2.swap(cand_d2);
        }
      }
    }
    if (pick < 0) {
      // Fewer distinct points than clusters: fall back to an unchosen index.
      std::vector<Index> free;
      for (Index j = 0; j < m; ++j)
        if (!chosen[static_cast<std::size_t>(j)]) free.push_back(j);
      std::uniform_int_distribution<std::size_t> u(0, free.size() - 1);
      pick = free[u(rng)];
      take(c, pick);
    } else {
      chosen[static_cast<std::size_t>(pick)] = 1;
      centroids.row(c) = x.row(pick);
      d2.swap(best_d2);
    }
  }
  return centroids;
}

LloydRun lloyd(const RowMatrix& x, Index k, int trials, Rng& rng, int max_iters) {
  const Index m = x.rows();
  const Index p = x.cols();
  LloydRun run;
  run.centroids = plus_plus_seeds(x, k, trials, rng);
  run.labels.assign(static_cast<std::size_t>(m), -1);
  std::vector<double> own(static_cast<std::size_t>(m), 0.0);
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);

  for (int it = 0; it < std::max(max_iters, 1); ++it) {
    bool changed = false;
    for (Index i = 0; i < m; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < k; ++c) {
        const double d = squared_distance(x.row(i).data(), run.centroids.row(c).data(), p);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.labels[static_cast<std::size_t>(i)] != best) changed = true;
      run.labels[static_cast<std::size_t>(i)] = best;
      own[static_cast<std::size_t>(i)] = best_d;
    }

    std::fill(sizes.begin(), sizes.end(), 0);
    for (Index i = 0; i < m; ++i) ++sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])];

    // Empty-cluster repair: move the centroid onto the point farthest from its
    // own centroid, taken from a cluster that can spare it.
    for (Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < m; ++i) {
        const Index li = run.labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(li)] <= 1) continue;
        if (own[static_cast<std::size_t>(i)] > far_d) {
          far_d = own[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      if (far < 0) break;  // unreachable when k <= m
      --sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(far)])];
      run.labels[static_cast<std::size_t>(far)] = c;
      own[static_cast<std::size_t>(far)] = 0.0;
      sizes[static_cast<std::size_t>(c)] = 1;
      run.centroids.row(c) = x.row(far);
      changed = true;
    }

    RowMatrix sums = RowMatrix::Zero(k, p);
    for (Index i = 0; i < m; ++i) sums.row(run.labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (Index c = 0; c < k; ++c) run.centroids.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);

    double cost = 0.0;
    for (Index i = 0; i < m; ++i) {
      cost += squared_distance(x.row(i).data(),
                               run.centroids.row(run.labels[static_cast<std::size_t>(i)]).data(), p);
    }
    run.history.push_back(cost);
    run.cost = cost;
    run.iterations = it + 1;
    if (!changed) break;
  }
  return run;
}

}  // namespace

ClusterAssignment kmeans(const Matrix& rows, const KMeansOptions& options) {
  const Index m = rows.rows();
  detail::require(m >= 1 && rows.cols() >= 1, ErrorCode::invalid_argument,
                  "kmeans: need at least one row and one column");
  detail::require(options.clusters >= 1 && options.clusters <= m, ErrorCode::invalid_argument,
                  "kmeans: cluster count must be in [1, number of rows]");
  detail::require(options.restarts >= 1, ErrorCode::invalid_argument,
                  "kmeans: restarts must be >= 1");
  detail::require(options.seeding_trials >= 0, ErrorCode::invalid_argument,
                  "kmeans: seeding_trials must be >= 0");
  detail::require(rows.allFinite(), ErrorCode::invalid_input, "kmeans: non-finite rows");

  const int trials = options.seeding_trials > 0
                         ? options.seeding_trials
                         : 2 + static_cast<int>(std::log(static_cast<double>(options.clusters)));
  const RowMatrix x = rows;
  LloydRun best;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    LloydRun run = lloyd(x, options.clusters, trials, rng, options.max_iters);
    if (run.cost < best.cost) best = std::move(run);
  }

  ClusterAssignment out;
  out.labels = std::move(best.labels);
  out.sizes.assign(static_cast<std::size_t>(options.clusters), 0);
  for (Index l : out.labels) ++out.sizes[static_cast<std::size_t>(l)];
  out.centroids = best.centroids;
  out.cost = best.cost;
  out.cost_history = std::move(best.history);
  out.iterations = best.iterations;
  return out;
}

double within_cluster_cost(const Matrix& rows, const std::vector<Index>& labels, Index clusters) {
  detail::require(static_cast<Index>(labels.size()) == rows.rows(), ErrorCode::dimension_mismatch,
                  "within_cluster_cost: one label per row required");
  Matrix sums = Matrix::Zero(clusters, rows.cols());
  Vector counts = Vector::Zero(clusters);
  for (Index i = 0; i < rows.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += rows.row(i);
    counts(labels[static_cast<std::size_t>(i)]) += 1.0;
  }
  double cost = 0.0;
  for (Index i = 0; i < rows.rows(); ++i) {
    const Index l = labels[static_cast<std::size_t>(i)];
    cost += (rows.row(i) - sums.row(l) / counts(l)).squaredNorm();
  }
  return cost;
}

// ---------------------------------------------------------------------------
// IndicatorMatrix

IndicatorMatrix::IndicatorMatrix(std::vector<Index> labels, Index clusters)
    : labels_(std::move(labels)), sizes_(static_cast<std::size_t>(std::max<Index>(clusters, 0)), 0) {
  detail::require(clusters >= 1, ErrorCode::invalid_argument, "indicator: need >= 1 cluster");
  detail::require(!labels_.empty(), ErrorCode::invalid_argument, "indicator: no rows");
  for (Index l : labels_) {
    detail::require(l >= 0 && l < clusters, ErrorCode::invalid_argument,
                    "indicator: label out of range");
    ++sizes_[static_cast<std::size_t>(l)];
  }
  inv_sqrt_sizes_.resize(clusters);
  for (Index k = 0; k < clusters; ++k) {
    detail::require(sizes_[static_cast<std::size_t>(k)] > 0, ErrorCode::invalid_argument,
                    "indicator: every cluster must be non-empty");
    inv_sqrt_sizes_(k) = 1.0 / std::sqrt(static_cast<double>(sizes_[static_cast<std::size_t>(k)]));
  }
}

IndicatorMatrix IndicatorMatrix::singletons(Index m) {
  std::vector<Index> labels(static_cast<std::size_t>(m));
  std::iota(labels.begin(), labels.end(), Index{0});
  return IndicatorMatrix(std::move(labels), m);
}

Matrix IndicatorMatrix::dense() const {
  Matrix h = Matrix::Zero(rows(), clusters());
  for (Index j = 0; j < rows(); ++j) {
    const Index k = labels_[static_cast<std::size_t>(j)];
    h(j, k) = inv_sqrt_sizes_(k);
  }
  return h;
}

Matrix IndicatorMatrix::compress(const Matrix& u) const {
  detail::require(u.rows() == rows(), ErrorCode::dimension_mismatch,
                  "indicator compress: row count mismatch");
  Matrix out = Matrix::Zero(clusters(), u.cols());
  for (Index j = 0; j < rows(); ++j) out.row(labels_[static_cast<std::size_t>(j)]) += u.row(j);
  return inv_sqrt_sizes_.asDiagonal() * out;
}

Matrix IndicatorMatrix::expand(const Matrix& v) const {
  detail::require(v.rows() == clusters(), ErrorCode::dimension_mismatch,
                  "indicator expand: row count mismatch");
  Matrix out(rows(), v.cols());
  for (Index j = 0; j < rows(); ++j) {
    const Index k = labels_[static_cast<std::size_t>(j)];
    out.row(j) = v.row(k) * inv_sqrt_sizes_(k);
  }
  return out;
}

Matrix IndicatorMatrix::project(const Matrix& u) const { return expand(compress(u)); }

// ---------------------------------------------------------------------------
// Gap statistic

GapResult gap_statistic(const Matrix& rows, const GapOptions& options) {
  detail::require(options.references >= 5, ErrorCode::invalid_argument,
                  "gap_statistic: at least 5 reference datasets required");
  detail::require(rows.rows() >= 1 && rows.cols() >= 1, ErrorCode::invalid_argument,
                  "gap_statistic: empty input");
  const Vector lo = rows.colwise().minCoeff();
  const Vector hi = rows.colwise().maxCoeff();
  detail::require((hi - lo).maxCoeff() > 0.0, ErrorCode::degenerate_input,
                  "gap_statistic: rows are identical (zero bounding box)");

  auto log_dispersion = [&](const Matrix& x, std::uint64_t seed) {
    KMeansOptions km{options.clusters, seed, options.restarts, options.max_iters};
    const double w = kmeans(x, km).cost;
    detail::require(w > 0.0, ErrorCode::degenerate_input,
                    "gap_statistic: zero within-cluster dispersion");
    return std::log(w);
  };

  GapResult out;
  out.log_dispersion = log_dispersion(rows, derive_seed(options.seed, {0}));

  std::vector<double> ref(static_cast<std::size_t>(options.references));
  for (int b = 0; b < options.references; ++b) {
    Rng rng(derive_seed(options.seed, {1, static_cast<std::uint64_t>(b)}));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix sample(rows.rows(), rows.cols());
    for (Index i = 0; i < sample.rows(); ++i)
      for (Index t = 0; t < sample.cols(); ++t) sample(i, t) = lo(t) + (hi(t) - lo(t)) * u(rng);
    ref[static_cast<std::size_t>(b)] =
        log_dispersion(sample, derive_seed(options.seed, {2, static_cast<std::uint64_t>(b)}));
  }
  const double b = static_cast<double>(ref.size());
  out.reference_mean = std::accumulate(ref.begin(), ref.end(), 0.0) / b;
  double ss = 0.0;
  for (double v : ref) ss += (v - out.reference_mean) * (v - out.reference_mean);
  out.reference_sd = std::sqrt(ss / b);
  out.standard_error = out.reference_sd * std::sqrt(1.0 + 1.0 / b);
  out.gap = out.reference_mean - out.log_dispersion;
  return out;
}

std::optional<PlateauRange> detect_plateau(const std::vector<double>& x,
                                           const std::vector<double>& y, double fraction) {
  detail::require(x.size() == y.size(), ErrorCode::dimension_mismatch,
                  "detect_plateau: x and y differ in length");
  if (x.size() < 2) return std::nullopt;
  std::vector<double> slope(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    detail::require(x[i + 1] > x[i], ErrorCode::invalid_argument,
                    "detect_plateau: x must be strictly increasing");
    slope[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  }
  const auto steepest = std::max_element(slope.begin(), slope.end());
  if (!(*steepest > 0.0)) return std::nullopt;
  const double threshold = fraction * *steepest;
  auto start = std::find_if(steepest + 1, slope.end(), [&](double s) { return s < threshold; });
  if (start == slope.end()) return std::nullopt;
  auto stop = start;
  while (stop + 1 != slope.end() && *(stop + 1) < threshold) ++stop;
  PlateauRange range;
  range.first = static_cast<std::size_t>(start - slope.begin());
  range.last = static_cast<std::size_t>(stop - slope.begin()) + 1;
  return range;
}

}  // namespace mahal
