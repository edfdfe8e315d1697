#pragma once

#include "mahal/matrix_core.hpp"
#include "mahal/survival.hpp"
#include "mahal/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mahal::experiments {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

enum class ExperimentId { recover, pd_error, block_embed, gene_pipeline, gap_scan };

const char* to_string(ExperimentId id) noexcept;
ExperimentId parse_experiment(const std::string& name);

/**
 * Every knob of every experiment. Fields irrelevant to the chosen experiment
 * are carried along unchanged so a config survives a JSON round trip exactly.
 */
struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::recover;
  std::uint64_t seed = 1;
  int trials = 1;
  unsigned threads = 1;
  std::string output_dir;

  // synthetic models
  Index m = 1200;
  Index n = 500;
  Index fit_columns = 50;           ///< recover: columns used to fit the metric
  Index true_clusters = 18;         ///< block model K
  double sigma2 = 1.0;
  double rho = 0.5;
  std::vector<Index> n_grid;        ///< pd-error sample sizes

  // metric
  Index rank = 2;                   ///< K (global) or d (local)
  Index clusters = 3;               ///< K_c
  Index neighbors = 20;             ///< N
  bool informed = true;
  int kmeans_restarts = 20;
  int max_iters = 1000;
  std::optional<double> grad_tol;
  double kernel_multiplier = 1.0;
  Index embed_dims = 2;

  // gene pipeline and gap scan
  std::string data_path;
  std::string survival_path;
  Index top_genes = 200;
  int initializations = 20;
  std::vector<Index> pvalue_grid;
  std::vector<Index> gap_grid;
  int gap_references = 5;
  SurrogateParams surrogate{};

  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults that reproduce the corresponding experiment.
ExperimentConfig default_config(ExperimentId id);

/// Throws Error(invalid_argument) naming the first offending field.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep the experiment defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the canonical JSON text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Seed of trial `t`.
std::uint64_t trial_seed(const ExperimentConfig& config, std::uint64_t t);

/// A plottable table: one CSV with a header row.
struct Series {
  std::string name;
  std::vector<std::string> headers;
  std::vector<std::vector<double>> columns;  ///< one vector per header

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::map<std::string, double> aggregates;
  std::vector<std::map<std::string, double>> trials;
  std::vector<Series> series;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  /// Report file name and series file names relative to the output directory.
  std::string report_file() const;
  std::string series_file(const Series& s) const;
};

/// Writes the JSON report and one CSV per series; returns the report path.
std::string write_report(const ExperimentReport& report, const std::string& directory);

void write_series_csv(const Series& series, const std::string& path);
Series read_series_csv(const std::string& path);

/// Genes x subjects table with row and column ids.
struct LabeledMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Matrix values;
};

LabeledMatrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const LabeledMatrix& data, const std::string& path);

struct SurvivalTable {
  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<bool> events;
};

SurvivalTable read_survival_csv(const std::string& path);
void write_survival_csv(const SurvivalTable& table, const std::string& path);

/// Survival records in the order of `subject_ids`; throws data_error listing
/// ids missing on either side.
std::vector<SurvivalRecord> match_survival(const SurvivalTable& table,
                                           const std::vector<std::string>& subject_ids);

/// Rows with the largest sample variance, kept in their original order.
std::vector<Index> top_variance_rows(const Matrix& values, Index count);

// evaluation helpers
double pearson(const std::vector<double>& a, const std::vector<double>& b);
/// Correlation between y and its least-squares fit on [1, X].
double multiple_correlation(const Matrix& x, const Vector& y);
/// Fraction of agreement after choosing the better of the two label matchings.
double majority_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

ExperimentReport run_recover(const ExperimentConfig& config);
ExperimentReport run_pd_error(const ExperimentConfig& config);
ExperimentReport run_block_embed(const ExperimentConfig& config);
ExperimentReport run_gene_pipeline(const ExperimentConfig& config);
ExperimentReport run_gap_scan(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace mahal::experiments
