#include "mahal/experiments.hpp"
#include "mahal/synthgen.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <type_traits>
#include <iostream>
#include <vector>

namespace {

namespace ex = mahal::experiments;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(mahal::ErrorCode code) {
  switch (code) {
    case mahal::ErrorCode::invalid_argument:
      return kExitUsage;
    case mahal::ErrorCode::invalid_input:
    case mahal::ErrorCode::dimension_mismatch:
    case mahal::ErrorCode::data_error:
      return kExitData;
    default:
      return kExitNumerical;
  }
}

std::string default_out_dir() {
  if (const char* env = std::getenv("MAHAL_OUT_DIR"); env && *env) return env;
  return ".";
}

/// An override flag: applied to the config only when given on the command line.
struct Override {
  CLI::Option* option = nullptr;
  std::function<void(ex::ExperimentConfig&)> apply;
};

using Index = mahal::Index;

struct ExperimentCommand {
  ex::ExperimentId id;
  CLI::App* app = nullptr;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int trials = 0;
  unsigned threads = 0;
  std::vector<Override> overrides;

  template <typename T>
  void flag(const std::string& name, const std::string& help,
            std::function<void(ex::ExperimentConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    if constexpr (std::is_same_v<T, std::vector<Index>>) opt->delimiter(',');
    overrides.push_back({opt, [value, set](ex::ExperimentConfig& c) { set(c, *value); }});
  }
};

void add_common(ExperimentCommand& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "JSON config file; flags override its fields");
  cmd.app->add_option("--out", cmd.out_dir, "Output directory (default: $MAHAL_OUT_DIR or .)");
  auto* seed = cmd.app->add_option("--seed", cmd.seed, "Base seed");
  auto* trials = cmd.app->add_option("--trials", cmd.trials, "Number of trials")->check(CLI::PositiveNumber);
  auto* threads = cmd.app->add_option("--threads", cmd.threads, "Worker threads (0 = all cores)");
  cmd.overrides.push_back({seed, [&cmd](ex::ExperimentConfig& c) { c.seed = cmd.seed; }});
  cmd.overrides.push_back({trials, [&cmd](ex::ExperimentConfig& c) { c.trials = cmd.trials; }});
  cmd.overrides.push_back({threads, [&cmd](ex::ExperimentConfig& c) { c.threads = cmd.threads; }});
}

void add_metric_flags(ExperimentCommand& cmd) {
  cmd.flag<Index>("--rank", "Number of principal directions (K or d)",
                  [](auto& c, const Index& v) { c.rank = v; });
  cmd.flag<Index>("--clusters", "Row clusters K_c", [](auto& c, const Index& v) { c.clusters = v; });
  cmd.flag<int>("--restarts", "k-means restarts", [](auto& c, const int& v) { c.kmeans_restarts = v; });
  cmd.flag<int>("--max-iters", "Constrained PCA iteration cap",
                [](auto& c, const int& v) { c.max_iters = v; });
  cmd.flag<double>("--grad-tol", "Constrained PCA stopping threshold",
                   [](auto& c, const double& v) { c.grad_tol = v; });
}

void add_model_flags(ExperimentCommand& cmd) {
  cmd.flag<Index>("--m", "Rows of the synthetic model", [](auto& c, const Index& v) { c.m = v; });
  cmd.flag<Index>("--true-clusters", "Block-model clusters K",
                  [](auto& c, const Index& v) { c.true_clusters = v; });
  cmd.flag<double>("--sigma2", "Block-model variance", [](auto& c, const double& v) { c.sigma2 = v; });
  cmd.flag<double>("--rho", "Block-model within-cluster covariance",
                   [](auto& c, const double& v) { c.rho = v; });
}

void add_gene_flags(ExperimentCommand& cmd) {
  cmd.flag<std::string>("--data", "Expression CSV (genes x subjects); surrogate data when absent",
                        [](auto& c, const std::string& v) { c.data_path = v; });
  cmd.flag<Index>("--top-genes", "Keep this many highest-variance rows",
                  [](auto& c, const Index& v) { c.top_genes = v; });
}

void build_experiment(ExperimentCommand& cmd) {
  add_common(cmd);
  switch (cmd.id) {
    case ex::ExperimentId::recover:
      cmd.flag<Index>("--n", "Samples", [](auto& c, const Index& v) { c.n = v; });
      cmd.flag<Index>("--fit-columns", "Columns used to fit the metric",
                      [](auto& c, const Index& v) { c.fit_columns = v; });
      cmd.flag<double>("--kernel-multiplier", "Kernel scale as a multiple of the median",
                       [](auto& c, const double& v) { c.kernel_multiplier = v; });
      add_metric_flags(cmd);
      break;
    case ex::ExperimentId::pd_error:
      cmd.flag<std::vector<Index>>("--n-grid", "Sample sizes",
                                   [](auto& c, const std::vector<Index>& v) { c.n_grid = v; });
      add_model_flags(cmd);
      add_metric_flags(cmd);
      break;
    case ex::ExperimentId::block_embed:
      cmd.flag<Index>("--n", "Samples", [](auto& c, const Index& v) { c.n = v; });
      cmd.flag<double>("--kernel-multiplier", "Kernel scale as a multiple of the median",
                       [](auto& c, const double& v) { c.kernel_multiplier = v; });
      add_model_flags(cmd);
      add_metric_flags(cmd);
      break;
    case ex::ExperimentId::gene_pipeline:
      add_gene_flags(cmd);
      cmd.flag<std::string>("--survival", "Survival CSV with columns id,time,event",
                            [](auto& c, const std::string& v) { c.survival_path = v; });
      cmd.flag<Index>("--neighbors", "Neighborhood size N", [](auto& c, const Index& v) { c.neighbors = v; });
      cmd.flag<int>("--initializations", "k-means initializations averaged for the P-value",
                    [](auto& c, const int& v) { c.initializations = v; });
      cmd.flag<std::vector<Index>>("--pvalue-grid", "Neighborhood sizes for the P-value curve",
                                   [](auto& c, const std::vector<Index>& v) { c.pvalue_grid = v; });
      cmd.flag<double>("--kernel-multiplier", "Kernel scale as a multiple of the median",
                       [](auto& c, const double& v) { c.kernel_multiplier = v; });
      add_metric_flags(cmd);
      break;
    case ex::ExperimentId::gap_scan:
      add_gene_flags(cmd);
      cmd.flag<std::vector<Index>>("--gap-grid", "Neighborhood sizes to scan",
                                   [](auto& c, const std::vector<Index>& v) { c.gap_grid = v; });
      cmd.flag<int>("--references", "Reference datasets per gap value",
                    [](auto& c, const int& v) { c.gap_references = v; });
      cmd.flag<Index>("--clusters", "Clusters K_c", [](auto& c, const Index& v) { c.clusters = v; });
      cmd.flag<int>("--restarts", "k-means restarts", [](auto& c, const int& v) { c.kmeans_restarts = v; });
      break;
  }
}

int run_experiment(const ExperimentCommand& cmd) {
  ex::ExperimentConfig config =
      cmd.config_path.empty() ? ex::default_config(cmd.id) : ex::load_config(cmd.config_path);
  if (config.experiment != cmd.id) {
    std::cerr << "error: config file is for '" << ex::to_string(config.experiment) << "', not '"
              << ex::to_string(cmd.id) << "'\n";
    return kExitUsage;
  }
  for (const auto& o : cmd.overrides)
    if (o.option->count() > 0) o.apply(config);
  const std::string out = cmd.out_dir.empty()
                              ? (config.output_dir.empty() ? default_out_dir() : config.output_dir)
                              : cmd.out_dir;

  const auto start = std::chrono::steady_clock::now();
  const ex::ExperimentReport report = ex::run_experiment(config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string path = ex::write_report(report, out);

  std::cout << ex::to_string(config.experiment) << ": wrote " << path << " (" << seconds << " s)\n";
  for (const auto& [k, v] : report.aggregates) std::cout << "  " << k << " = " << v << '\n';
  for (const auto& n : report.notes) std::cout << "  note: " << n << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering-informed Mahalanobis metrics: experiments and tools"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<ExperimentCommand>> commands;
  const std::pair<ex::ExperimentId, const char*> experiments[] = {
      {ex::ExperimentId::recover, "Hidden-distance recovery on the linear model"},
      {ex::ExperimentId::pd_error, "Principal-direction error versus sample size on the block model"},
      {ex::ExperimentId::block_embed, "Diffusion-maps type separation on the block model"},
      {ex::ExperimentId::gene_pipeline, "Local metrics, bipartition and log-rank scoring of expression data"},
      {ex::ExperimentId::gap_scan, "Gap statistic versus neighborhood size"}};
  for (const auto& [id, help] : experiments) {
    auto cmd = std::make_unique<ExperimentCommand>();
    cmd->id = id;
    cmd->app = app.add_subcommand(ex::to_string(id), help);
    build_experiment(*cmd);
    commands.push_back(std::move(cmd));
  }

  std::string config_experiment;
  std::string config_out;
  auto* config_cmd = app.add_subcommand("config", "Print the default config of an experiment");
  config_cmd->add_option("experiment", config_experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"recover", "pd-error", "block-embed", "gene-pipeline", "gap-scan"}));
  config_cmd->add_option("--out", config_out, "Write to this file instead of stdout");

  mahal::SurrogateParams surrogate;
  std::uint64_t surrogate_seed = 1;
  std::string surrogate_out;
  auto* make_cmd = app.add_subcommand("make-surrogate",
                                      "Write a synthetic expression CSV and matching survival CSV");
  make_cmd->add_option("--seed", surrogate_seed, "Seed");
  make_cmd->add_option("--out", surrogate_out, "Output directory (default: $MAHAL_OUT_DIR or .)");
  make_cmd->add_option("--genes", surrogate.genes, "Rows");
  make_cmd->add_option("--subjects", surrogate.subjects, "Columns");
  make_cmd->add_option("--clusters", surrogate.clusters, "Gene clusters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    for (const auto& cmd : commands)
      if (cmd->app->parsed()) return run_experiment(*cmd);

    if (config_cmd->parsed()) {
      const std::string text = ex::to_json(ex::default_config(ex::parse_experiment(config_experiment))).dump(2);
      if (config_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream out(config_out);
        if (!out) {
          std::cerr << "error: cannot write " << config_out << '\n';
          return kExitData;
        }
        out << text << '\n';
      }
      return 0;
    }

    if (make_cmd->parsed()) {
      const std::string dir = surrogate_out.empty() ? default_out_dir() : surrogate_out;
      const mahal::SurrogateDataset s = mahal::gen_survival_surrogate(surrogate, surrogate_seed);
      const std::filesystem::path base(dir);
      ex::write_matrix_csv({s.gene_ids, s.subject_ids, s.expression.values()}, (base / "expression.csv").string());
      ex::SurvivalTable t;
      t.ids = s.subject_ids;
      for (const auto& r : s.survival) {
        t.times.push_back(r.time);
        t.events.push_back(r.event);
      }
      ex::write_survival_csv(t, (base / "survival.csv").string());
      std::cout << "wrote " << (base / "expression.csv").string() << " and "
                << (base / "survival.csv").string() << '\n';
      return 0;
    }
  } catch (const mahal::Error& e) {
    std::cerr << "error (" << mahal::to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
