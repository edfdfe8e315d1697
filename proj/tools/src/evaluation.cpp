#include "mahal/experiments.hpp"

#include "internal.hpp"

#include <cmath>
#include <map>

namespace mahal::experiments {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require(a.size() == b.size() && a.size() >= 2, ErrorCode::dimension_mismatch,
                  "pearson: need two equal-length samples of size >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double multiple_correlation(const Matrix& x, const Vector& y) {
  detail::require(x.rows() == y.size(), ErrorCode::dimension_mismatch,
                  "multiple_correlation: one response per row required");
  Matrix z(x.rows(), x.cols() + 1);
  z << Vector::Ones(x.rows()), x;
  const Vector fit = z * z.colPivHouseholderQr().solve(y);
  return pearson(std::vector<double>(fit.data(), fit.data() + fit.size()),
                 std::vector<double>(y.data(), y.data() + y.size()));
}

double majority_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  detail::require(predicted.size() == truth.size() && !truth.empty(), ErrorCode::dimension_mismatch,
                  "majority_accuracy: label vectors differ in length");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) agree += (predicted[i] != 0) == (truth[i] != 0);
  const double a = static_cast<double>(agree) / static_cast<double>(truth.size());
  return std::max(a, 1.0 - a);
}

namespace internal {

double cluster_purity(const std::vector<Index>& clusters, const std::vector<int>& truth) {
  std::map<Index, std::map<int, std::size_t>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][truth[i]];
  std::size_t hit = 0;
  for (const auto& [c, counts] : table) {
    std::size_t best = 0;
    for (const auto& [t, k] : counts) best = std::max(best, k);
    hit += best;
  }
  return static_cast<double>(hit) / static_cast<double>(clusters.size());
}

void add_trial_means(ExperimentReport& report) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& t : report.trials)
    for (const auto& [k, v] : t) values[k].push_back(v);
  for (const auto& [k, v] : values) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    report.aggregates[k + "_mean"] = mean;
    report.aggregates[k + "_sd"] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
}

std::vector<double> upper_triangle(const Matrix& a, bool take_sqrt) {
  std::vector<double> out;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < j; ++i) out.push_back(take_sqrt ? std::sqrt(a(i, j)) : a(i, j));
  return out;
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace internal
}  // namespace mahal::experiments
