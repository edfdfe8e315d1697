#pragma once

#include "mahal/experiments.hpp"

#include <vector>

namespace mahal::experiments::internal {

/// Share of rows whose cluster's majority label matches their own label.
double cluster_purity(const std::vector<Index>& clusters, const std::vector<int>& truth);

/// Adds <key>_mean and <key>_sd for every per-trial scalar.
void add_trial_means(ExperimentReport& report);

/// Entries above the diagonal, column by column.
std::vector<double> upper_triangle(const Matrix& a, bool take_sqrt);

std::vector<double> to_std(const Vector& v);

void require_experiment(const ExperimentConfig& config, ExperimentId id);

/// Expression matrix plus optional survival, from CSV files or the surrogate.
struct GeneInput {
  DataMatrix d{Matrix::Zero(1, 1)};
  std::vector<std::string> subjects;
  std::vector<SurvivalRecord> survival;  ///< empty when no survival data
  std::vector<int> planted;              ///< surrogate groups, empty for real data
  std::vector<std::string> notes;
};

GeneInput load_gene_input(const ExperimentConfig& config, bool want_survival);

}  // namespace mahal::experiments::internal
