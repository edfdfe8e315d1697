// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "mahal/experiments.hpp"
#include "mahal/informed_pca.hpp"
#include "mahal/metrics.hpp"
#include "mahal/survival.hpp"
#include "mahal/synthgen.hpp"
#include "test_support.hpp"

#include <CLI11.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
namespace ex = mahal::experiments;
using namespace mahal;
using Clock = std::chrono::steady_clock;

// Pinned thresholds.
constexpr double kCorrMin = 0.98;
constexpr double kRecoverSeconds = 30.0;
constexpr double kExactCovTol = 1e-8;
constexpr double kPinvTol = 1e-7;
constexpr double kGradientTol = 1e-4;
constexpr double kProjectionTol = 1e-10;
constexpr double kPdErrorSeconds = 600.0;
constexpr double kBlockAccuracy = 0.95;
constexpr double kLaplaceMin = 0.95;
constexpr double kNullRate = 0.05;
constexpr double kNullBand = 0.02;
constexpr int kGeneSeeds = 20;
constexpr int kGeneWinsNeeded = 16;
constexpr double kPipelineSeconds = 120.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail.str()
            << std::endl;
  if (!o.pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Recovery runs are shared by the correlation and Laplace criteria.
std::vector<ex::ExperimentReport> recover_runs;
std::vector<double> recover_seconds;

void recover_correlation() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ex::ExperimentConfig c = ex::default_config(ex::ExperimentId::recover);
    c.seed = seed;
    c.trials = 1;
    const auto start = Clock::now();
    recover_runs.push_back(ex::run_recover(c));
    recover_seconds.push_back(seconds_since(start));
    const auto& t = recover_runs.back().trials.front();
    const double plain = t.at("corr_plain"), informed = t.at("corr_informed");
    const bool ok = plain >= kCorrMin && informed >= kCorrMin && recover_seconds.back() < kRecoverSeconds;
    o.pass = o.pass && ok;
    o.detail << "seed " << seed << " plain=" << plain << " informed=" << informed << " ("
             << recover_seconds.back() << " s)" << (ok ? "" : " <-") << "; ";
  }
  o.detail << "need >= " << kCorrMin << ", < " << kRecoverSeconds << " s";
  report(1, "hidden-distance recovery", o);
}

void exact_covariance_oracle() {
  Outcome o;
  const LinearModelDataset data = gen_linear_model(2000, 5);
  GlobalFitOptions opts;
  opts.rank = 2;
  const GlobalMetricModel model =
      fit_global_from_covariance(Covariance::dense(linear_model_covariance(data.mixing)), opts);
  Rng rng(9);
  std::uniform_int_distribution<Index> pick(0, data.d.cols() - 1);
  double worst = 0.0;
  int pairs = 0;
  while (pairs < 1000) {
    const Index i = pick(rng), j = pick(rng);
    if (i == j) continue;
    // Hidden covariance is I / 12, so the hidden Mahalanobis distance is 12 |dx|^2.
    const double hidden = 12.0 * (data.hidden.col(i) - data.hidden.col(j)).squaredNorm();
    const double d = global_distance(model, data.d.col(i), data.d.col(j));
    worst = std::max(worst, std::abs(d - hidden) / hidden);
    ++pairs;
  }
  o.pass = worst < kExactCovTol;
  o.detail << "1000 pairs, max relative error " << worst << " (tol " << kExactCovTol << ")";
  report(2, "exact-covariance metric equals hidden Mahalanobis", o);
}

void pseudo_inverse_suite() {
  Outcome o;
  int failed_random = 0, failed_family = 0;
  double worst = 0.0;
  auto check = [&](const Matrix& s, RankOrFloor r) {
    const PseudoInverseCheck c = check_pseudoinverse_properties(s, pinv_psd(s, r).materialize(), kPinvTol);
    for (double x : c.residuals) worst = std::max(worst, x);
    return c.all_passed();
  };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(derive_seed(1001, {seed}));
    std::uniform_int_distribution<Index> dim(2, 30);
    const Index m = dim(rng);
    std::uniform_int_distribution<Index> rk(1, m);
    if (!check(test::random_psd(m, rk(rng), rng), RelativeFloor{})) ++failed_random;
  }
  // A Sx A^T with A m x k of full column rank and Sx positive definite.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(2002, {seed}));
    const Index m = 10 + static_cast<Index>(seed) * 5, k = 1 + static_cast<Index>(seed % 4);
    const Matrix a = test::gaussian_matrix(m, k, rng);
    const Matrix sx = test::random_psd(k, k, rng) + 0.1 * Matrix::Identity(k, k);
    if (!check(a * sx * a.transpose(), Rank{k})) ++failed_family;
  }
  const LinearModelDataset lm = gen_linear_model(10, 3);
  if (!check(linear_model_covariance(lm.mixing), Rank{2})) ++failed_family;
  o.pass = failed_random == 0 && failed_family == 0;
  o.detail << "50 random PSD: " << failed_random << " failed; A Sx A^T family (11): " << failed_family
           << " failed; max residual " << worst << " (tol " << kPinvTol << ")";
  report(3, "pseudo-inverse identities", o);
}

void gradient_check() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(3003, {seed}));
    std::uniform_int_distribution<Index> md(4, 50), kd(1, 5);
    const Index m = md(rng);
    const Index k = std::min(kd(rng), m);
    const Covariance s = Covariance::dense(test::random_psd(m, m, rng) / static_cast<double>(m));
    const Matrix u = 0.5 * test::gaussian_matrix(m, k, rng);
    const Matrix du = test::gaussian_matrix(m, k, rng);
    const double h = 1e-6;
    const double fd = (reconstruction_error(u + h * du, s) - reconstruction_error(u - h * du, s)) / (2 * h);
    const double analytic = pca_gradient(u, s).cwiseProduct(du).sum();
    worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-12));
  }
  o.pass = worst < kGradientTol;
  o.detail << "20 instances, max relative error " << worst << " (tol " << kGradientTol << ")";
  report(4, "gradient vs central differences", o);
}

void projection_algebra() {
  Outcome o;
  double herm = 0.0, idem = 0.0, one_shot = 0.0, one_shot_dense = 0.0;
  int increases = 0, traces = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(4004, {seed}));
    const Index m = 40, kc = 6, k = 3;
    const IndicatorMatrix h(test::random_labels(m, kc, rng), kc);
    const Matrix hd = h.dense();
    const Matrix p = hd * hd.transpose();
    herm = std::max(herm, (p - p.transpose()).cwiseAbs().maxCoeff());
    idem = std::max(idem, (p * p - p).cwiseAbs().maxCoeff());

    const Covariance sigma = Covariance::dense(test::random_psd(m, m, rng));
    const PrincipalBasis plain = pca_top_k(sigma, k);
    ConstrainedPcaOptions zero;
    zero.max_iters = 0;
    const Matrix got = constrained_pca(sigma, h, k, plain, zero).directions;
    Matrix expected = h.project(plain.directions);
    Matrix expected_dense = p * plain.directions;
    for (Index j = 0; j < k; ++j) {
      expected.col(j).normalize();
      expected_dense.col(j).normalize();
    }
    one_shot = std::max(one_shot, (got - expected).cwiseAbs().maxCoeff());
    one_shot_dense = std::max(one_shot_dense, (got - expected_dense).cwiseAbs().maxCoeff());

    for (auto route : {ConstrainedRoute::reduced, ConstrainedRoute::full_space}) {
      ConstrainedPcaOptions o2;
      o2.route = route;
      o2.record_trace = true;
      const PrincipalBasis b = constrained_pca(sigma, h, k, plain, o2);
      ++traces;
      for (std::size_t i = 1; i < b.objective_trace.size(); ++i)
        if (b.objective_trace[i] > b.objective_trace[i - 1]) ++increases;
    }
  }
  o.pass = herm < kProjectionTol && idem < kProjectionTol && one_shot == 0.0 &&
           one_shot_dense < kProjectionTol && increases == 0;
  o.detail << "symmetry " << herm << ", idempotence " << idem << " (tol " << kProjectionTol
           << "); one-shot vs normalized H H^T U: " << one_shot << " (must be 0), vs dense product "
           << one_shot_dense << "; " << increases
           << " objective increases over " << traces << " traces";
  report(5, "projection algebra", o);
}

void pd_error_ordinal() {
  Outcome o;
  ex::ExperimentConfig c = ex::default_config(ex::ExperimentId::pd_error);
  c.m = 900;
  c.true_clusters = 18;
  c.rank = 18;
  c.trials = 50;
  c.n_grid = {30, 40, 50, 60, 70, 80, 90, 100};
  const auto start = Clock::now();
  const ex::ExperimentReport r = ex::run_pd_error(c);
  const double secs = seconds_since(start);
  const double every = r.aggregates.at("informed_below_plain_every_n");
  const double oracle = r.aggregates.at("oracle_le_kmeans");
  o.pass = every == 1.0 && oracle == 1.0 && secs < kPdErrorSeconds;
  o.detail << "informed below plain at every n: " << (every == 1.0 ? "yes" : "no")
           << "; oracle <= k-means: " << (oracle == 1.0 ? "yes" : "no") << "; mean e_f plain/informed/oracle "
           << r.aggregates.at("ef_plain_mean") << "/" << r.aggregates.at("ef_informed_mean") << "/"
           << r.aggregates.at("ef_oracle_mean") << "; " << secs << " s (limit " << kPdErrorSeconds << ")";
  report(6, "principal-direction error ordering", o);
}

void block_separation() {
  Outcome o;
  ex::ExperimentConfig c = ex::default_config(ex::ExperimentId::block_embed);
  c.n = 100;
  c.trials = 20;
  const ex::ExperimentReport r = ex::run_block_embed(c);
  const double informed = r.aggregates.at("accuracy_informed_mean");
  const double plain = r.aggregates.at("accuracy_plain_mean");
  o.pass = informed >= kBlockAccuracy && informed > plain;
  o.detail << "20 seeds, mean accuracy informed " << informed << ", plain " << plain << " (need >= "
           << kBlockAccuracy << " and > plain)";
  report(7, "block-model separation", o);
}

void laplace_check() {
  Outcome o;
  double worst_plain = 1.0, worst_informed = 1.0;
  for (const auto& r : recover_runs) {
    worst_plain = std::min(worst_plain, r.trials.front().at("laplace_plain"));
    worst_informed = std::min(worst_informed, r.trials.front().at("laplace_informed"));
  }
  o.pass = !recover_runs.empty() && worst_plain >= kLaplaceMin && worst_informed >= kLaplaceMin;
  o.detail << "seeds 1..5, worst correlation with cos(pi x_k): plain " << worst_plain << ", informed "
           << worst_informed << " (need >= " << kLaplaceMin << ")";
  report(8, "diffusion-map Laplace eigenfunctions", o);
}

void survival_checks() {
  Outcome o;
  Rng rng(2024);
  std::exponential_distribution<double> death(0.05);
  std::uniform_real_distribution<double> censor(10.0, 60.0);
  std::vector<SurvivalRecord> base;
  for (int i = 0; i < 80; ++i) {
    const double t = death(rng), c = censor(rng);
    base.push_back({std::min(t, c), t <= c, i < 40 ? 0 : 1});
  }
  std::vector<int> groups;
  for (const auto& r : base) groups.push_back(r.group);
  int rejected = 0;
  const int trials = 2000;
  for (int k = 0; k < trials; ++k) {
    std::shuffle(groups.begin(), groups.end(), rng);
    for (std::size_t i = 0; i < base.size(); ++i) base[i].group = groups[i];
    rejected += logrank_test(base).p_value < 0.05 ? 1 : 0;
  }
  const double rate = static_cast<double>(rejected) / trials;

  const std::vector<SurvivalRecord> km_input = {{1, true, 0}, {2, true, 0}, {3, true, 0}};
  const SurvivalCurve km = kaplan_meier(km_input, 0);
  const std::vector<double> expected = {1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0};
  const bool km_exact = km.survival == expected;

  o.pass = std::abs(rate - kNullRate) <= kNullBand && km_exact;
  o.detail << "null rejection rate " << rate << " over " << trials << " permutations (need "
           << kNullRate << " +/- " << kNullBand << "); KM (1,2,3) "
           << (km_exact ? "exact" : "mismatch");
  report(9, "survival statistics", o);
}

void gene_pipeline(const std::string& cli, const fs::path& data_dir, const fs::path& work) {
  Outcome o;
  int wins = 0;
  std::ostringstream losers;
  for (int seed = 1; seed <= kGeneSeeds; ++seed) {
    ex::ExperimentConfig c = ex::default_config(ex::ExperimentId::gene_pipeline);
    c.seed = static_cast<std::uint64_t>(seed);
    c.pvalue_grid.clear();
    const ex::ExperimentReport r = ex::run_gene_pipeline(c);
    if (r.aggregates.at("ilm_below_lm") == 1.0)
      ++wins;
    else
      losers << " " << seed;
  }
  const fs::path out = work / "bundled";
  const std::string args = "gene-pipeline --data \"" + (data_dir / "expression.csv").string() +
                           "\" --survival \"" + (data_dir / "survival.csv").string() + "\" --out \"" +
                           out.string() + "\"";
  const auto start = Clock::now();
  const int rc = run_cli(cli, args, work / "bundled.log");
  const double secs = seconds_since(start);
  const bool wrote = fs::exists(out / "gene-pipeline_report.json");
  o.pass = wins >= kGeneWinsNeeded && rc == 0 && wrote && secs < kPipelineSeconds;
  o.detail << "surrogate p_ILM < p_LM in " << wins << "/" << kGeneSeeds << " seeds (need >= "
           << kGeneWinsNeeded << ")";
  if (wins < kGeneSeeds) o.detail << ", misses:" << losers.str();
  o.detail << "; bundled CSV via CLI exit " << rc << ", " << secs << " s (limit " << kPipelineSeconds << ")";
  report(10, "gene pipeline on surrogate data", o);
}

void determinism(const std::string& cli, const fs::path& data_dir, const fs::path& work) {
  Outcome o;
  const std::string expr = "\"" + (data_dir / "expression.csv").string() + "\"";
  const std::string surv = "\"" + (data_dir / "survival.csv").string() + "\"";
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"recover", "recover --trials 2 --n 150 --fit-columns 40 --restarts 3"},
      {"pd-error", "pd-error --trials 2 --n-grid 40,60"},
      {"block-embed", "block-embed --trials 2"},
      {"gene-pipeline", "gene-pipeline --data " + expr + " --survival " + surv +
                            " --initializations 3 --pvalue-grid 20,30"},
      {"gap-scan", "gap-scan --data " + expr + " --gap-grid 10,20,30 --references 5"}};
  int identical = 0;
  for (const auto& [name, args] : runs) {
    std::vector<fs::path> dirs;
    bool ran = true;
    for (const char* tag : {"a", "b"}) {
      const fs::path dir = work / "determinism" / tag / name;
      fs::remove_all(dir);
      ran = ran && run_cli(cli, args + " --seed 7 --out \"" + dir.string() + "\"", work / (name + ".log")) == 0;
      dirs.push_back(dir);
    }
    bool same = ran;
    std::size_t files = 0;
    if (ran) {
      for (const auto& entry : fs::directory_iterator(dirs[0])) {
        ++files;
        const fs::path other = dirs[1] / entry.path().filename();
        same = same && fs::exists(other) && slurp(entry.path()) == slurp(other);
      }
      same = same && files > 0 &&
             files == static_cast<std::size_t>(std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{}));
    }
    identical += same ? 1 : 0;
    o.detail << name << (same ? " identical" : (ran ? " DIFFERS" : " FAILED TO RUN")) << " (" << files
             << " files); ";
  }
  o.pass = identical == static_cast<int>(runs.size());
  o.detail << identical << "/" << runs.size() << " experiments byte-identical";
  report(11, "determinism", o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string data_dir, cli, work_dir = "acceptance_work";
  app.add_option("--data-dir", data_dir, "Directory holding expression.csv and survival.csv")->required();
  app.add_option("--cli", cli, "Path to the mahal executable")->required();
  app.add_option("--work-dir", work_dir, "Scratch directory for CLI outputs");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = fs::absolute(work_dir);
  fs::create_directories(work);
  std::cout.precision(6);

  const std::vector<std::function<void()>> checks = {
      recover_correlation,
      exact_covariance_oracle,
      pseudo_inverse_suite,
      gradient_check,
      projection_algebra,
      pd_error_ordinal,
      block_separation,
      laplace_check,
      survival_checks,
      [&] { gene_pipeline(cli, data_dir, work); },
      [&] { determinism(cli, data_dir, work); }};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      Outcome o;
      o.pass = false;
      o.detail << "threw: " << e.what();
      report(static_cast<int>(i + 1), "criterion", o);
    }
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criterion(s) FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
