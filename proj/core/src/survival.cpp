#include "mahal/survival.hpp"

#include "mahal/error.hpp"

#include <algorithm>
#include <cmath>

namespace mahal {
namespace {

void validate(const SurvivalRecord& r) {
  detail::require(std::isfinite(r.time) && r.time >= 0.0, ErrorCode::invalid_input,
                  "survival: times must be finite and >= 0");
  detail::require(r.group == 0 || r.group == 1, ErrorCode::invalid_input,
                  "survival: group labels must be 0 or 1");
}

std::vector<SurvivalRecord> sorted_by_time(std::vector<SurvivalRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const SurvivalRecord& a, const SurvivalRecord& b) { return a.time < b.time; });
  return records;
}

}  // namespace

double SurvivalCurve::at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

SurvivalCurve kaplan_meier(const std::vector<SurvivalRecord>& records, int group) {
  std::vector<SurvivalRecord> mine;
  for (const auto& r : records) {
    validate(r);
    if (r.group == group) mine.push_back(r);
  }
  detail::require(!mine.empty(), ErrorCode::invalid_argument, "kaplan_meier: group is empty");
  mine = sorted_by_time(std::move(mine));

  SurvivalCurve curve;
  curve.times.push_back(0.0);
  curve.survival.push_back(1.0);
  curve.at_risk.push_back(static_cast<long>(mine.size()));
  curve.events.push_back(0);
  long at_risk = static_cast<long>(mine.size());
  double s = 1.0;
  for (std::size_t k = 0; k < mine.size();) {
    const double t = mine[k].time;
    long deaths = 0;
    long leaving = 0;
    for (; k < mine.size() && mine[k].time == t; ++k) {
      ++leaving;
      if (mine[k].event) ++deaths;
    }
    if (deaths > 0) {
      s *= static_cast<double>(at_risk - deaths) / static_cast<double>(at_risk);
      if (t == 0.0) {
        curve.survival.back() = s;
        curve.events.back() = deaths;
      } else {
        curve.times.push_back(t);
        curve.survival.push_back(s);
        curve.at_risk.push_back(at_risk);
        curve.events.push_back(deaths);
      }
    }
    at_risk -= leaving;
  }
  return curve;
}

double chi_square_sf_1dof(double x) {
  if (!(x > 0.0)) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

LogRankResult logrank_test(const std::vector<SurvivalRecord>& records) {
  long total1 = 0;
  long events = 0;
  for (const auto& r : records) {
    validate(r);
    total1 += r.group;
    events += r.event ? 1 : 0;
  }
  const long total = static_cast<long>(records.size());
  detail::require(total1 > 0 && total1 < total, ErrorCode::invalid_argument,
                  "logrank_test: both groups must be non-empty");
  detail::require(events > 0, ErrorCode::undefined_test, "logrank_test: no events observed");

  const std::vector<SurvivalRecord> sorted = sorted_by_time(records);
  LogRankResult out;
  double n = static_cast<double>(total);
  double n1 = static_cast<double>(total1);
  for (std::size_t k = 0; k < sorted.size();) {
    const double t = sorted[k].time;
    double d = 0.0, d1 = 0.0, leave = 0.0, leave1 = 0.0;
    for (; k < sorted.size() && sorted[k].time == t; ++k) {
      leave += 1.0;
      leave1 += sorted[k].group;
      if (sorted[k].event) {
        d += 1.0;
        d1 += sorted[k].group;
      }
    }
    if (d > 0.0) {
      out.observed += d1;
      out.expected += d * n1 / n;
      if (n > 1.0) out.variance += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
    }
    n -= leave;
    n1 -= leave1;
  }
  detail::require(out.variance > 0.0, ErrorCode::undefined_test,
                  "logrank_test: zero variance, groups never share a risk set");
  const double diff = out.observed - out.expected;
  out.statistic = diff * diff / out.variance;
  out.p_value = chi_square_sf_1dof(out.statistic);
  return out;
}

}  // namespace mahal
