#include "mahal/clustering.hpp"
#include "mahal/embedding.hpp"
#include "mahal/experiments.hpp"
#include "mahal/metrics.hpp"
#include "mahal/parallel.hpp"
#include "mahal/random.hpp"

#include "internal.hpp"

#include <cmath>

namespace mahal::experiments {
namespace internal {

GeneInput load_gene_input(const ExperimentConfig& c, bool want_survival) {
  GeneInput in;
  Matrix values;
  if (c.data_path.empty()) {
    SurrogateDataset s = gen_survival_surrogate(c.surrogate, c.seed);
    values = s.expression.values();
    in.subjects = s.subject_ids;
    in.planted = s.groups;
    if (want_survival) in.survival = s.survival;
    in.notes.push_back("data: synthetic surrogate generated from the config seed");
  } else {
    LabeledMatrix m = read_matrix_csv(c.data_path);
    values = std::move(m.values);
    in.subjects = std::move(m.col_ids);
    if (want_survival) {
      if (c.survival_path.empty()) {
        in.notes.push_back("no survival file given; survival scoring skipped");
      } else {
        in.survival = match_survival(read_survival_csv(c.survival_path), in.subjects);
      }
    }
  }
  if (c.top_genes < values.rows()) {
    const std::vector<Index> keep = top_variance_rows(values, c.top_genes);
    Matrix filtered(static_cast<Index>(keep.size()), values.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) filtered.row(static_cast<Index>(k)) = values.row(keep[k]);
    values = std::move(filtered);
  } else if (c.top_genes > values.rows()) {
    in.notes.push_back("top_genes exceeds the number of rows; all " +
                       std::to_string(values.rows()) + " rows kept");
  }
  in.d = DataMatrix(std::move(values));
  return in;
}

}  // namespace internal

namespace {

struct PipelineRun {
  Embedding embedding;
  Bipartition groups;
  double p_value = 1.0;
};

PipelineRun score_local(const internal::GeneInput& in, const ExperimentConfig& c, Index neighbors,
                        bool informed, std::uint64_t seed) {
  LocalFitOptions o;
  o.neighbors = neighbors;
  o.rank = c.rank;
  o.informed = informed;
  o.clusters = c.clusters;
  o.seed = seed;
  o.kmeans_restarts = c.kmeans_restarts;
  o.constrained.max_iters = c.max_iters;
  o.constrained.grad_tol = c.grad_tol;
  const LocalMetricModel model = fit_local(in.d, o);
  PipelineRun run;
  run.embedding = diffusion_map_from_distances(distance_matrix(model, in.d), c.embed_dims, c.kernel_multiplier);
  run.groups = spectral_bipartition(run.embedding);
  if (!in.survival.empty() && !run.groups.single_group) {
    std::vector<SurvivalRecord> records = in.survival;
    for (std::size_t j = 0; j < records.size(); ++j) records[j].group = run.groups.labels[j];
    run.p_value = logrank_test(records).p_value;
  }
  return run;
}

std::uint64_t init_seed(const ExperimentConfig& c, std::uint64_t n, std::uint64_t r) {
  return derive_seed(c.seed, {2, n, r});
}

void add_survival_series(ExperimentReport& report, const internal::GeneInput& in,
                         const PipelineRun& lm, const PipelineRun& ilm) {
  Series s{"survival", {"metric", "group", "time", "survival"}, {{}, {}, {}, {}}};
  const std::pair<int, const PipelineRun*> runs[] = {{0, &lm}, {1, &ilm}};
  for (const auto& [metric, run] : runs) {
    if (run->groups.single_group) continue;
    std::vector<SurvivalRecord> records = in.survival;
    for (std::size_t j = 0; j < records.size(); ++j) records[j].group = run->groups.labels[j];
    for (int g = 0; g < 2; ++g) {
      const SurvivalCurve curve = kaplan_meier(records, g);
      for (std::size_t k = 0; k < curve.times.size(); ++k) {
        s.columns[0].push_back(metric);
        s.columns[1].push_back(g);
        s.columns[2].push_back(curve.times[k]);
        s.columns[3].push_back(curve.survival[k]);
      }
    }
  }
  report.series.push_back(std::move(s));
}

}  // namespace

ExperimentReport run_gene_pipeline(const ExperimentConfig& c) {
  internal::require_experiment(c, ExperimentId::gene_pipeline);
  const internal::GeneInput in = internal::load_gene_input(c, true);
  ExperimentReport report;
  report.config = c;
  report.notes = in.notes;
  const bool scored = !in.survival.empty();
  const auto inits = static_cast<std::size_t>(c.initializations);

  const PipelineRun lm = score_local(in, c, c.neighbors, false, 0);
  std::vector<PipelineRun> ilm(inits);
  parallel_for(inits, c.threads, [&](std::size_t r) {
    ilm[r] = score_local(in, c, c.neighbors, true, init_seed(c, static_cast<std::uint64_t>(c.neighbors), r));
  });

  report.trials.resize(inits);
  int single = 0;
  for (std::size_t r = 0; r < inits; ++r) {
    auto& row = report.trials[r];
    row["initialization"] = static_cast<double>(r);
    if (scored) row["p_ilm"] = ilm[r].p_value;
    if (!in.planted.empty()) row["accuracy_ilm"] = majority_accuracy(ilm[r].groups.labels, in.planted);
    single += ilm[r].groups.single_group ? 1 : 0;
  }
  internal::add_trial_means(report);
  report.aggregates.erase("initialization_mean");
  report.aggregates.erase("initialization_sd");
  if (scored) {
    report.aggregates["p_lm"] = lm.p_value;
    report.aggregates["ilm_below_lm"] = report.aggregates["p_ilm_mean"] < lm.p_value ? 1.0 : 0.0;
  }
  if (!in.planted.empty()) report.aggregates["accuracy_lm"] = majority_accuracy(lm.groups.labels, in.planted);
  if (lm.groups.single_group) report.notes.push_back("LM bipartition put every subject in one group");
  if (single > 0)
    report.notes.push_back(std::to_string(single) + " ILM bipartition(s) put every subject in one group");

  Series emb{"embedding", {"subject", "lm_group", "ilm_group"}, {{}, {}, {}}};
  for (Index j = 0; j < in.d.cols(); ++j) {
    emb.columns[0].push_back(static_cast<double>(j));
    emb.columns[1].push_back(lm.groups.labels[static_cast<std::size_t>(j)]);
    emb.columns[2].push_back(ilm.front().groups.labels[static_cast<std::size_t>(j)]);
  }
  const std::pair<const char*, const Embedding*> named[] = {{"lm", &lm.embedding}, {"ilm", &ilm.front().embedding}};
  for (const auto& [name, e] : named)
    for (Index j = 0; j < e->dims(); ++j) {
      emb.headers.push_back(std::string(name) + "_" + std::to_string(j + 1));
      emb.columns.push_back(internal::to_std(e->coordinates.col(j)));
    }
  report.series.push_back(std::move(emb));
  if (scored) add_survival_series(report, in, lm, ilm.front());

  if (scored && !c.pvalue_grid.empty()) {
    Series curve{"pvalue_vs_n", {"n", "p_lm", "p_ilm_mean", "p_ilm_sd"}, {{}, {}, {}, {}}};
    for (Index big_n : c.pvalue_grid) {
      detail::require(big_n <= in.d.cols(), ErrorCode::invalid_argument,
                      "pvalue_grid: N exceeds the number of subjects");
      const double p_lm = score_local(in, c, big_n, false, 0).p_value;
      std::vector<double> p(inits);
      parallel_for(inits, c.threads, [&](std::size_t r) {
        p[r] = score_local(in, c, big_n, true, init_seed(c, static_cast<std::uint64_t>(big_n), r)).p_value;
      });
      double mu = 0.0;
      for (double x : p) mu += x;
      mu /= static_cast<double>(p.size());
      double ss = 0.0;
      for (double x : p) ss += (x - mu) * (x - mu);
      curve.columns[0].push_back(static_cast<double>(big_n));
      curve.columns[1].push_back(p_lm);
      curve.columns[2].push_back(mu);
      curve.columns[3].push_back(p.size() > 1 ? std::sqrt(ss / static_cast<double>(p.size() - 1)) : 0.0);
    }
    report.series.push_back(std::move(curve));
  }
  return report;
}

ExperimentReport run_gap_scan(const ExperimentConfig& c) {
  internal::require_experiment(c, ExperimentId::gap_scan);
  const internal::GeneInput in = internal::load_gene_input(c, false);
  ExperimentReport report;
  report.config = c;
  report.notes = in.notes;
  const Index n = in.d.cols();

  Series curve{"curve", {"n", "gap_mean", "gap_sd"}, {{}, {}, {}}};
  std::vector<double> xs, ys;
  for (Index big_n : c.gap_grid) {
    detail::require(big_n <= n, ErrorCode::invalid_argument, "gap_grid: N exceeds the number of columns");
    std::vector<double> g(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), c.threads, [&](std::size_t i) {
      const std::vector<Index> nb = nearest_columns(in.d, static_cast<Index>(i), big_n);
      GapOptions o;
      o.clusters = c.clusters;
      o.seed = derive_seed(c.seed, {static_cast<std::uint64_t>(big_n), i});
      o.references = c.gap_references;
      o.restarts = c.kmeans_restarts;
      g[i] = gap_statistic(in.d.select_columns(nb).values(), o).gap;
    });
    double mu = 0.0;
    for (double x : g) mu += x;
    mu /= static_cast<double>(g.size());
    double ss = 0.0;
    for (double x : g) ss += (x - mu) * (x - mu);
    const double sd = g.size() > 1 ? std::sqrt(ss / static_cast<double>(g.size() - 1)) : 0.0;
    curve.columns[0].push_back(static_cast<double>(big_n));
    curve.columns[1].push_back(mu);
    curve.columns[2].push_back(sd);
    xs.push_back(static_cast<double>(big_n));
    ys.push_back(mu);
    report.trials.push_back({{"n", static_cast<double>(big_n)}, {"gap_mean", mu}, {"gap_sd", sd}});
  }
  report.series.push_back(std::move(curve));

  if (xs.size() < 2) {
    report.notes.push_back("insufficient range: a plateau needs at least two grid points");
  } else if (const auto plateau = detect_plateau(xs, ys)) {
    report.aggregates["plateau_first_n"] = xs[plateau->first];
    report.aggregates["plateau_last_n"] = xs[plateau->last];
  } else {
    report.notes.push_back("no plateau detected in the scanned range");
  }
  return report;
}

}  // namespace mahal::experiments
