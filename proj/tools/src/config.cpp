#include "mahal/experiments.hpp"

#include "mahal/random.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace mahal::experiments {
namespace {

using nlohmann::json;

std::vector<Index> range(Index lo, Index hi, Index step) {
  std::vector<Index> v;
  for (Index x = lo; x <= hi; x += step) v.push_back(x);
  return v;
}

void check(bool ok, const std::string& field, const std::string& what) {
  detail::require(ok, ErrorCode::invalid_argument, "config field '" + field + "': " + what);
}

json surrogate_json(const SurrogateParams& s) {
  return json{{"genes", s.genes},           {"subjects", s.subjects},
              {"clusters", s.clusters},     {"sigma2", s.sigma2},
              {"rho", s.rho},               {"separation", s.separation},
              {"base_hazard", s.base_hazard}, {"hazard_ratio", s.hazard_ratio},
              {"censor_lo", s.censor_lo},   {"censor_hi", s.censor_hi}};
}

template <typename T>
void read_field(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  if (!j.contains(key)) return;
  seen.insert(key);
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    detail::fail(ErrorCode::invalid_argument,
                 std::string("config field '") + key + "' has the wrong type: " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    detail::require(seen.count(key) > 0, ErrorCode::invalid_argument,
                    "unknown config field '" + where + key + "'");
  }
}

SurrogateParams surrogate_from_json(const json& j, SurrogateParams s) {
  detail::require(j.is_object(), ErrorCode::invalid_argument,
                  "config field 'surrogate' must be an object");
  std::set<std::string> seen;
  read_field(j, "genes", s.genes, seen);
  read_field(j, "subjects", s.subjects, seen);
  read_field(j, "clusters", s.clusters, seen);
  read_field(j, "sigma2", s.sigma2, seen);
  read_field(j, "rho", s.rho, seen);
  read_field(j, "separation", s.separation, seen);
  read_field(j, "base_hazard", s.base_hazard, seen);
  read_field(j, "hazard_ratio", s.hazard_ratio, seen);
  read_field(j, "censor_lo", s.censor_lo, seen);
  read_field(j, "censor_hi", s.censor_hi, seen);
  reject_unknown(j, seen, "surrogate.");
  return s;
}

}  // namespace

const char* to_string(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::recover: return "recover";
    case ExperimentId::pd_error: return "pd-error";
    case ExperimentId::block_embed: return "block-embed";
    case ExperimentId::gene_pipeline: return "gene-pipeline";
    case ExperimentId::gap_scan: return "gap-scan";
  }
  return "unknown";
}

ExperimentId parse_experiment(const std::string& name) {
  for (auto id : {ExperimentId::recover, ExperimentId::pd_error, ExperimentId::block_embed,
                  ExperimentId::gene_pipeline, ExperimentId::gap_scan}) {
    if (name == to_string(id)) return id;
  }
  detail::fail(ErrorCode::invalid_argument, "unknown experiment '" + name + "'");
}

ExperimentConfig default_config(ExperimentId id) {
  ExperimentConfig c;
  c.experiment = id;
  switch (id) {
    case ExperimentId::recover:
      break;
    case ExperimentId::pd_error:
      c.m = 900;
      c.n = 100;
      c.trials = 50;
      c.rank = 18;
      c.clusters = 19;
      c.n_grid = range(30, 100, 10);
      break;
    case ExperimentId::block_embed:
      c.m = 900;
      c.n = 100;
      c.trials = 20;
      c.rank = 18;
      c.clusters = 19;
      break;
    case ExperimentId::gene_pipeline:
      c.rank = 6;
      c.clusters = 7;
      c.neighbors = 20;
      c.kmeans_restarts = 1;
      c.kernel_multiplier = 2.0;
      c.pvalue_grid = range(10, 60, 5);
      break;
    case ExperimentId::gap_scan:
      c.rank = 6;
      c.clusters = 7;
      c.kmeans_restarts = 1;
      c.gap_grid = range(5, 60, 5);
      break;
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  check(c.trials >= 1, "trials", "must be >= 1");
  check(c.rank >= 1, "rank", "must be >= 1");
  check(c.clusters >= 1, "clusters", "must be >= 1");
  check(c.kmeans_restarts >= 1, "kmeans_restarts", "must be >= 1");
  check(c.max_iters >= 0, "max_iters", "must be >= 0");
  check(!c.grad_tol || *c.grad_tol > 0.0, "grad_tol", "must be > 0");
  check(c.kernel_multiplier > 0.0, "kernel_multiplier", "must be > 0");
  check(c.embed_dims >= 1, "embed_dims", "must be >= 1");
  switch (c.experiment) {
    case ExperimentId::recover:
      check(c.m >= 3 && c.m % 3 == 0, "m", "must be a positive multiple of 3");
      check(c.n >= 2, "n", "must be >= 2");
      check(c.fit_columns >= 2 && c.fit_columns <= c.n, "fit_columns", "must be in [2, n]");
      check(c.rank <= c.m, "rank", "must be <= m");
      check(c.clusters <= c.m, "clusters", "must be <= m");
      check(c.embed_dims < c.n, "embed_dims", "must be < n");
      break;
    case ExperimentId::pd_error:
    case ExperimentId::block_embed:
      check(c.true_clusters >= 1 && c.true_clusters <= c.m, "true_clusters", "must be in [1, m]");
      check(c.sigma2 > 0.0 && c.rho >= 0.0 && c.rho < c.sigma2, "rho",
            "need 0 <= rho < sigma2");
      check(c.clusters <= c.m, "clusters", "must be <= m");
      check(c.rank <= c.true_clusters, "rank", "must be <= true_clusters");
      if (c.experiment == ExperimentId::pd_error) {
        check(!c.n_grid.empty(), "n_grid", "must not be empty");
        for (Index v : c.n_grid) check(v > c.rank, "n_grid", "every n must exceed rank");
      } else {
        check(c.n > c.rank && c.n > c.embed_dims, "n", "must exceed rank and embed_dims");
      }
      break;
    case ExperimentId::gene_pipeline:
      check(c.initializations >= 1, "initializations", "must be >= 1");
      check(c.neighbors > c.rank, "neighbors", "must exceed rank");
      for (Index v : c.pvalue_grid) check(v > c.rank, "pvalue_grid", "every N must exceed rank");
      check(c.top_genes >= 1, "top_genes", "must be >= 1");
      break;
    case ExperimentId::gap_scan:
      check(c.gap_references >= 5, "gap_references", "must be >= 5");
      check(!c.gap_grid.empty(), "gap_grid", "must not be empty");
      for (Index v : c.gap_grid) check(v >= 1, "gap_grid", "every N must be >= 1");
      check(c.top_genes >= 1, "top_genes", "must be >= 1");
      break;
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return json{{"experiment", to_string(c.experiment)},
              {"seed", c.seed},
              {"trials", c.trials},
              {"threads", c.threads},
              {"output_dir", c.output_dir},
              {"m", c.m},
              {"n", c.n},
              {"fit_columns", c.fit_columns},
              {"true_clusters", c.true_clusters},
              {"sigma2", c.sigma2},
              {"rho", c.rho},
              {"n_grid", c.n_grid},
              {"rank", c.rank},
              {"clusters", c.clusters},
              {"neighbors", c.neighbors},
              {"informed", c.informed},
              {"kmeans_restarts", c.kmeans_restarts},
              {"max_iters", c.max_iters},
              {"grad_tol", c.grad_tol ? json(*c.grad_tol) : json(nullptr)},
              {"kernel_multiplier", c.kernel_multiplier},
              {"embed_dims", c.embed_dims},
              {"data_path", c.data_path},
              {"survival_path", c.survival_path},
              {"top_genes", c.top_genes},
              {"initializations", c.initializations},
              {"pvalue_grid", c.pvalue_grid},
              {"gap_grid", c.gap_grid},
              {"gap_references", c.gap_references},
              {"surrogate", surrogate_json(c.surrogate)}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  detail::require(j.is_object(), ErrorCode::invalid_argument, "config must be a JSON object");
  detail::require(j.contains("experiment") && j.at("experiment").is_string(),
                  ErrorCode::invalid_argument, "config needs a string field 'experiment'");
  ExperimentConfig c = default_config(parse_experiment(j.at("experiment").get<std::string>()));
  std::set<std::string> seen{"experiment"};
  read_field(j, "seed", c.seed, seen);
  read_field(j, "trials", c.trials, seen);
  read_field(j, "threads", c.threads, seen);
  read_field(j, "output_dir", c.output_dir, seen);
  read_field(j, "m", c.m, seen);
  read_field(j, "n", c.n, seen);
  read_field(j, "fit_columns", c.fit_columns, seen);
  read_field(j, "true_clusters", c.true_clusters, seen);
  read_field(j, "sigma2", c.sigma2, seen);
  read_field(j, "rho", c.rho, seen);
  read_field(j, "n_grid", c.n_grid, seen);
  read_field(j, "rank", c.rank, seen);
  read_field(j, "clusters", c.clusters, seen);
  read_field(j, "neighbors", c.neighbors, seen);
  read_field(j, "informed", c.informed, seen);
  read_field(j, "kmeans_restarts", c.kmeans_restarts, seen);
  read_field(j, "max_iters", c.max_iters, seen);
  if (j.contains("grad_tol")) {
    seen.insert("grad_tol");
    if (j.at("grad_tol").is_null()) {
      c.grad_tol.reset();
    } else {
      double v = 0.0;
      read_field(j, "grad_tol", v, seen);
      c.grad_tol = v;
    }
  }
  read_field(j, "kernel_multiplier", c.kernel_multiplier, seen);
  read_field(j, "embed_dims", c.embed_dims, seen);
  read_field(j, "data_path", c.data_path, seen);
  read_field(j, "survival_path", c.survival_path, seen);
  read_field(j, "top_genes", c.top_genes, seen);
  read_field(j, "initializations", c.initializations, seen);
  read_field(j, "pvalue_grid", c.pvalue_grid, seen);
  read_field(j, "gap_grid", c.gap_grid, seen);
  read_field(j, "gap_references", c.gap_references, seen);
  if (j.contains("surrogate")) {
    seen.insert("surrogate");
    c.surrogate = surrogate_from_json(j.at("surrogate"), c.surrogate);
  }
  reject_unknown(j, seen, "");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), ErrorCode::data_error, "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    detail::fail(ErrorCode::data_error, "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t trial_seed(const ExperimentConfig& config, std::uint64_t t) {
  return derive_seed(config.seed, {t});
}

}  // namespace mahal::experiments
