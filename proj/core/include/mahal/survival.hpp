#pragma once

#include <vector>

namespace mahal {

struct SurvivalRecord {
  double time = 0.0;
  bool event = false;  ///< true = death observed, false = censored
  int group = 0;       ///< 0 or 1
};

/// Product-limit step function; point k holds S(t) for t in [times[k], times[k+1]).
struct SurvivalCurve {
  std::vector<double> times;     ///< starts at 0, then each distinct event time
  std::vector<double> survival;  ///< starts at 1, non-increasing
  std::vector<long> at_risk;
  std::vector<long> events;

  double at(double t) const;
};

SurvivalCurve kaplan_meier(const std::vector<SurvivalRecord>& records, int group);

struct LogRankResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double observed = 0.0;  ///< deaths in group 1
  double expected = 0.0;  ///< expected deaths in group 1
  double variance = 0.0;
};

/// Two-group log-rank test with hypergeometric variance, chi-square(1) P-value.
LogRankResult logrank_test(const std::vector<SurvivalRecord>& records);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square_sf_1dof(double x);

}  // namespace mahal
