#include "mahal/embedding.hpp"
#include "mahal/experiments.hpp"
#include "mahal/metrics.hpp"
#include "mahal/parallel.hpp"
#include "mahal/random.hpp"

#include "internal.hpp"

#include <cmath>
#include <numbers>

namespace mahal::experiments {
namespace {

using internal::to_std;
using internal::upper_triangle;

ConstrainedPcaOptions constrained_options(const ExperimentConfig& c) {
  ConstrainedPcaOptions o;
  o.max_iters = c.max_iters;
  o.grad_tol = c.grad_tol;
  return o;
}

GlobalFitOptions global_options(const ExperimentConfig& c, bool informed, std::uint64_t seed) {
  GlobalFitOptions o;
  o.rank = c.rank;
  o.informed = informed;
  o.clusters = c.clusters;
  o.kmeans.seed = seed;
  o.kmeans.restarts = c.kmeans_restarts;
  o.constrained = constrained_options(c);
  return o;
}

Matrix squared_euclidean(const Matrix& d) {
  const Vector sq = d.colwise().squaredNorm();
  const Matrix g = d.transpose() * d;
  Matrix out = Matrix::Zero(d.cols(), d.cols());
  for (Index j = 0; j < d.cols(); ++j)
    for (Index i = j + 1; i < d.cols(); ++i) {
      const double v = std::max(sq(i) + sq(j) - 2.0 * g(i, j), 0.0);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

double laplace_score(const Embedding& e, const Matrix& hidden) {
  double worst = 1.0;
  for (Index k = 0; k < hidden.rows(); ++k) {
    const Vector target = (std::numbers::pi * hidden.row(k).transpose()).array().cos().matrix();
    worst = std::min(worst, multiple_correlation(e.coordinates, target));
  }
  return worst;
}

std::vector<double> column_of(const Matrix& a, Index j) { return to_std(a.col(j)); }

}  // namespace

namespace internal {

void require_experiment(const ExperimentConfig& config, ExperimentId id) {
  detail::require(config.experiment == id, ErrorCode::invalid_argument,
                  std::string("config is for experiment '") + to_string(config.experiment) +
                      "', expected '" + to_string(id) + "'");
  validate(config);
}

}  // namespace internal

ExperimentReport run_recover(const ExperimentConfig& c) {
  internal::require_experiment(c, ExperimentId::recover);
  ExperimentReport report;
  report.config = c;
  report.trials.resize(static_cast<std::size_t>(c.trials));
  std::vector<Series> first_series;
  std::vector<std::string> trial_notes(static_cast<std::size_t>(c.trials));

  parallel_for(static_cast<std::size_t>(c.trials), c.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(c, t);
    const LinearModelDataset data = gen_linear_model(c.n, seed, c.m / 3);
    const DataMatrix fit = data.d.leading_columns(c.fit_columns);
    const GlobalMetricModel plain = fit_global(fit, global_options(c, false, 0));
    const GlobalMetricModel informed = fit_global(fit, global_options(c, true, derive_seed(seed, {1})));

    const Matrix hidden_fit = data.hidden.leftCols(c.fit_columns);
    const std::vector<double> hidden = upper_triangle(squared_euclidean(hidden_fit), true);
    const Matrix dm_plain = distance_matrix(plain, fit);
    const Matrix dm_informed = distance_matrix(informed, fit);

    const Embedding e_euclid =
        diffusion_map_from_distances(squared_euclidean(data.d.values()), c.embed_dims, c.kernel_multiplier);
    const Embedding e_plain =
        diffusion_map_from_distances(distance_matrix(plain, data.d), c.embed_dims, c.kernel_multiplier);
    const Embedding e_informed =
        diffusion_map_from_distances(distance_matrix(informed, data.d), c.embed_dims, c.kernel_multiplier);

    std::vector<int> blocks(data.block_labels.begin(), data.block_labels.end());
    auto& row = report.trials[t];
    row["corr_plain"] = pearson(upper_triangle(dm_plain, true), hidden);
    row["corr_informed"] = pearson(upper_triangle(dm_informed, true), hidden);
    row["laplace_euclidean"] = laplace_score(e_euclid, data.hidden);
    row["laplace_plain"] = laplace_score(e_plain, data.hidden);
    row["laplace_informed"] = laplace_score(e_informed, data.hidden);
    row["iterations_informed"] = informed.basis.iterations_run;
    row["row_cluster_purity"] = internal::cluster_purity(informed.row_clusters->labels, blocks);
    if (informed.basis.collapsed_directions > 0)
      trial_notes[t] = "trial " + std::to_string(t) + ": " +
                       std::to_string(informed.basis.collapsed_directions) +
                       " informed direction(s) collapsed to zero";

    if (t == 0) {
      Series emb{"embedding", {"x1", "x2"}, {to_std(data.hidden.row(0).transpose()), to_std(data.hidden.row(1).transpose())}};
      const std::pair<const char*, const Embedding*> named[] = {
          {"euclidean", &e_euclid}, {"plain", &e_plain}, {"informed", &e_informed}};
      for (const auto& [name, e] : named)
        for (Index j = 0; j < e->dims(); ++j) {
          emb.headers.push_back(std::string(name) + "_" + std::to_string(j + 1));
          emb.columns.push_back(column_of(e->coordinates, j));
        }
      Series dist{"distances", {"hidden", "plain", "informed"},
                  {hidden, upper_triangle(dm_plain, true), upper_triangle(dm_informed, true)}};
      first_series = {std::move(emb), std::move(dist)};
    }
  });

  report.series = std::move(first_series);
  for (auto& n : trial_notes)
    if (!n.empty()) report.notes.push_back(std::move(n));
  internal::add_trial_means(report);
  double worst = 1.0;
  for (const auto& t : report.trials) worst = std::min({worst, t.at("corr_plain"), t.at("corr_informed")});
  report.aggregates["corr_min"] = worst;
  return report;
}

ExperimentReport run_pd_error(const ExperimentConfig& c) {
  internal::require_experiment(c, ExperimentId::pd_error);
  ExperimentReport report;
  report.config = c;
  const std::size_t grid = c.n_grid.size();
  const std::size_t jobs = grid * static_cast<std::size_t>(c.trials);
  report.trials.resize(jobs);
  const ConstrainedPcaOptions copt = constrained_options(c);

  parallel_for(jobs, c.threads, [&](std::size_t job) {
    const Index n = c.n_grid[job / static_cast<std::size_t>(c.trials)];
    const std::uint64_t t = job % static_cast<std::size_t>(c.trials);
    const std::uint64_t seed = derive_seed(c.seed, {static_cast<std::uint64_t>(n), t});
    BlockModelParams p;
    p.m = c.m;
    p.n = n;
    p.clusters = c.true_clusters;
    p.sigma2 = c.sigma2;
    p.rho = c.rho;
    const BlockModelDataset data = gen_block_model(p, seed);
    const Matrix truth = block_model_principal_directions(data, c.rank).directions;

    const Covariance sigma = sample_covariance_factor(data.d);
    const PrincipalBasis plain = pca_top_k(sigma, c.rank);
    KMeansOptions km;
    km.clusters = c.clusters;
    km.seed = derive_seed(seed, {1});
    km.restarts = c.kmeans_restarts;
    const IndicatorMatrix h(kmeans(data.d.values(), km));
    const PrincipalBasis informed = constrained_pca(sigma, h, c.rank, plain, copt);
    const IndicatorMatrix h_true(data.row_clusters, c.true_clusters);
    const PrincipalBasis oracle = constrained_pca(sigma, h_true, c.rank, plain, copt);

    auto& row = report.trials[job];
    row["n"] = static_cast<double>(n);
    row["trial"] = static_cast<double>(t);
    const std::pair<const char*, const PrincipalBasis*> named[] = {
        {"plain", &plain}, {"informed", &informed}, {"oracle", &oracle}};
    for (const auto& [name, b] : named) {
      row[std::string("ef_") + name] = pd_error(b->directions, truth, ProjectorNorm::frobenius);
      row[std::string("e2_") + name] = pd_error(b->directions, truth, ProjectorNorm::spectral);
    }
  });

  const char* keys[] = {"ef_plain", "ef_informed", "ef_oracle", "e2_plain", "e2_informed", "e2_oracle"};
  Series curve{"curve", {"n"}, {{}}};
  for (const char* k : keys) {
    curve.headers.push_back(std::string(k) + "_mean");
    curve.headers.push_back(std::string(k) + "_sd");
  }
  curve.columns.resize(curve.headers.size());
  bool every_n = true;
  for (std::size_t g = 0; g < grid; ++g) {
    const Index n = c.n_grid[g];
    curve.columns[0].push_back(static_cast<double>(n));
    std::map<std::string, double> mean;
    for (std::size_t ki = 0; ki < 6; ++ki) {
      std::vector<double> v;
      for (int t = 0; t < c.trials; ++t)
        v.push_back(report.trials[g * static_cast<std::size_t>(c.trials) + static_cast<std::size_t>(t)].at(keys[ki]));
      double mu = 0.0;
      for (double x : v) mu += x;
      mu /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mu) * (x - mu);
      const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      curve.columns[1 + 2 * ki].push_back(mu);
      curve.columns[2 + 2 * ki].push_back(sd);
      mean[keys[ki]] = mu;
      report.aggregates[std::string(keys[ki]) + "@n=" + std::to_string(n)] = mu;
    }
    every_n = every_n && mean["ef_informed"] < mean["ef_plain"] && mean["e2_informed"] < mean["e2_plain"];
  }
  report.series.push_back(std::move(curve));

  for (const char* k : keys) {
    double s = 0.0;
    for (const auto& t : report.trials) s += t.at(k);
    report.aggregates[std::string(k) + "_mean"] = s / static_cast<double>(report.trials.size());
  }
  report.aggregates["informed_below_plain_every_n"] = every_n ? 1.0 : 0.0;
  report.aggregates["oracle_le_kmeans"] =
      report.aggregates["ef_oracle_mean"] <= report.aggregates["ef_informed_mean"] &&
              report.aggregates["e2_oracle_mean"] <= report.aggregates["e2_informed_mean"]
          ? 1.0
          : 0.0;
  return report;
}

ExperimentReport run_block_embed(const ExperimentConfig& c) {
  internal::require_experiment(c, ExperimentId::block_embed);
  ExperimentReport report;
  report.config = c;
  report.trials.resize(static_cast<std::size_t>(c.trials));
  std::vector<Series> first_series;

  parallel_for(static_cast<std::size_t>(c.trials), c.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(c, t);
    BlockModelParams p;
    p.m = c.m;
    p.n = c.n;
    p.clusters = c.true_clusters;
    p.sigma2 = c.sigma2;
    p.rho = c.rho;
    const BlockModelDataset data = gen_block_model(p, seed);
    const GlobalMetricModel plain = fit_global(data.d, global_options(c, false, 0));
    const GlobalMetricModel informed = fit_global(data.d, global_options(c, true, derive_seed(seed, {1})));
    const Embedding e_plain =
        diffusion_map_from_distances(distance_matrix(plain, data.d), c.embed_dims, c.kernel_multiplier);
    const Embedding e_informed =
        diffusion_map_from_distances(distance_matrix(informed, data.d), c.embed_dims, c.kernel_multiplier);
    const Bipartition b_plain = spectral_bipartition(e_plain);
    const Bipartition b_informed = spectral_bipartition(e_informed);

    auto& row = report.trials[t];
    row["accuracy_plain"] = majority_accuracy(b_plain.labels, data.types);
    row["accuracy_informed"] = majority_accuracy(b_informed.labels, data.types);

    if (t == 0) {
      Series emb{"embedding", {"type", "plain_group", "informed_group"}, {{}, {}, {}}};
      for (std::size_t j = 0; j < data.types.size(); ++j) {
        emb.columns[0].push_back(data.types[j]);
        emb.columns[1].push_back(b_plain.labels[j]);
        emb.columns[2].push_back(b_informed.labels[j]);
      }
      const std::pair<const char*, const Embedding*> named[] = {{"plain", &e_plain}, {"informed", &e_informed}};
      for (const auto& [name, e] : named)
        for (Index j = 0; j < e->dims(); ++j) {
          emb.headers.push_back(std::string(name) + "_" + std::to_string(j + 1));
          emb.columns.push_back(column_of(e->coordinates, j));
        }
      first_series = {std::move(emb)};
    }
  });

  report.series = std::move(first_series);
  internal::add_trial_means(report);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentId::recover: return run_recover(config);
    case ExperimentId::pd_error: return run_pd_error(config);
    case ExperimentId::block_embed: return run_block_embed(config);
    case ExperimentId::gene_pipeline: return run_gene_pipeline(config);
    case ExperimentId::gap_scan: return run_gap_scan(config);
  }
  detail::fail(ErrorCode::invalid_argument, "unknown experiment");
}

}  // namespace mahal::experiments
