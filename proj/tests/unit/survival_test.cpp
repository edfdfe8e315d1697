#include "mahal/error.hpp"
#include "mahal/survival.hpp"
#include "mahal/random.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace mahal {
namespace {

std::vector<SurvivalRecord> events(std::initializer_list<double> times, int group) {
  std::vector<SurvivalRecord> out;
  for (double t : times) out.push_back({t, true, group});
  return out;
}

// Straightforward log-rank oracle: loop over distinct death times.
double logrank_oracle(const std::vector<SurvivalRecord>& r) {
  std::set<double> death_times;
  for (const auto& x : r)
    if (x.event) death_times.insert(x.time);
  double o_minus_e = 0.0, var = 0.0;
  for (double t : death_times) {
    double n = 0, n1 = 0, d = 0, d1 = 0;
    for (const auto& x : r) {
      if (x.time >= t) {
        n += 1;
        n1 += x.group == 1;
      }
      if (x.time == t && x.event) {
        d += 1;
        d1 += x.group == 1;
      }
    }
    o_minus_e += d1 - d * n1 / n;
    if (n > 1) var += d * (n1 / n) * (1 - n1 / n) * (n - d) / (n - 1);
  }
  return o_minus_e * o_minus_e / var;
}

TEST(KaplanMeier, ThreeEvents) {
  const SurvivalCurve c = kaplan_meier(events({1, 2, 3}, 0), 0);
  ASSERT_EQ(c.survival.size(), 4u);
  EXPECT_EQ(c.times[0], 0.0);
  EXPECT_EQ(c.survival[0], 1.0);
  EXPECT_EQ(c.survival[1], 2.0 / 3.0);
  EXPECT_EQ(c.survival[2], 1.0 / 3.0);
  EXPECT_EQ(c.survival[3], 0.0);
}

TEST(KaplanMeier, AllCensoredStaysAtOne) {
  const std::vector<SurvivalRecord> r = {{1, false, 1}, {4, false, 1}};
  const SurvivalCurve c = kaplan_meier(r, 1);
  for (double s : c.survival) EXPECT_EQ(s, 1.0);
  EXPECT_EQ(c.at(100.0), 1.0);
}

TEST(KaplanMeier, SingleSubject) {
  const SurvivalCurve c = kaplan_meier(events({5}, 0), 0);
  EXPECT_EQ(c.at(4.999), 1.0);
  EXPECT_EQ(c.at(5.0), 0.0);
}

TEST(KaplanMeier, CensoringLeavesRiskSet) {
  const std::vector<SurvivalRecord> r = {{1, true, 0}, {2, false, 0}, {3, true, 0}, {4, true, 0}};
  const SurvivalCurve c = kaplan_meier(r, 0);
  EXPECT_DOUBLE_EQ(c.at(1), 0.75);
  EXPECT_DOUBLE_EQ(c.at(3), 0.75 * 0.5);
  EXPECT_DOUBLE_EQ(c.at(4), 0.0);
}

TEST(KaplanMeier, RandomCurvesAreMonotoneAndBounded) {
  Rng rng(3);
  std::exponential_distribution<double> t(0.1);
  std::bernoulli_distribution e(0.7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SurvivalRecord> r;
    for (int i = 0; i < 40; ++i) r.push_back({std::round(t(rng)), e(rng), 0});
    const SurvivalCurve c = kaplan_meier(r, 0);
    for (std::size_t k = 1; k < c.survival.size(); ++k) {
      EXPECT_LE(c.survival[k], c.survival[k - 1]);
      EXPECT_GE(c.survival[k], 0.0);
    }
  }
}

TEST(KaplanMeier, EmptyGroupIsRejected) {
  EXPECT_THROW(kaplan_meier(events({1, 2}, 0), 1), Error);
}

TEST(LogRank, MirroredGroupsGiveZero) {
  auto r = events({1, 3, 4, 8}, 0);
  const auto b = events({1, 3, 4, 8}, 1);
  r.insert(r.end(), b.begin(), b.end());
  r.push_back({6, false, 0});
  r.push_back({6, false, 1});
  const LogRankResult res = logrank_test(r);
  EXPECT_NEAR(res.statistic, 0.0, 1e-14);
  EXPECT_NEAR(res.p_value, 1.0, 1e-12);
}

TEST(LogRank, EarlyVersusLateDeaths) {
  auto r = events({1, 2, 3}, 0);
  const auto b = events({10, 20, 30}, 1);
  r.insert(r.end(), b.begin(), b.end());
  const LogRankResult res = logrank_test(r);
  EXPECT_NEAR(res.statistic, logrank_oracle(r), 1e-12);
  EXPECT_LT(res.p_value, 0.05);
}

TEST(LogRank, MatchesOracleWithTiesAndCensoring) {
  Rng rng(5);
  std::uniform_int_distribution<int> t(1, 12);
  std::bernoulli_distribution e(0.6), g(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SurvivalRecord> r;
    for (int i = 0; i < 30; ++i) r.push_back({static_cast<double>(t(rng)), e(rng), g(rng) ? 1 : 0});
    r.push_back({1.0, true, 0});
    r.push_back({2.0, true, 1});
    EXPECT_NEAR(logrank_test(r).statistic, logrank_oracle(r), 1e-10) << "trial " << trial;
  }
}

TEST(LogRank, SwappingLabelsKeepsStatistic) {
  Rng rng(6);
  std::exponential_distribution<double> t(0.2);
  std::vector<SurvivalRecord> r;
  for (int i = 0; i < 25; ++i) r.push_back({t(rng), i % 3 != 0, i % 2});
  const double a = logrank_test(r).statistic;
  for (auto& x : r) x.group = 1 - x.group;
  EXPECT_NEAR(logrank_test(r).statistic, a, 1e-12);
}

TEST(LogRank, LateCensoredRecordOnlyChangesRiskSets) {
  auto r = events({1, 2, 3, 5}, 0);
  const auto b = events({2, 4, 6, 7}, 1);
  r.insert(r.end(), b.begin(), b.end());
  auto extended = r;
  extended.push_back({100.0, false, 1});
  const double with = logrank_test(extended).statistic;
  EXPECT_NEAR(with, logrank_oracle(extended), 1e-12);
  EXPECT_NE(with, logrank_test(r).statistic);
}

TEST(LogRank, NoEventsIsUndefined) {
  const std::vector<SurvivalRecord> r = {{1, false, 0}, {2, false, 1}};
  try {
    logrank_test(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_test);
  }
}

TEST(LogRank, NullRejectionRateUnderPermutation) {
  Rng rng(2024);
  std::exponential_distribution<double> t(0.05);
  std::uniform_real_distribution<double> c(10.0, 60.0);
  std::vector<SurvivalRecord> base;
  for (int i = 0; i < 80; ++i) {
    const double death = t(rng), censor = c(rng);
    base.push_back({std::min(death, censor), death <= censor, i < 40 ? 0 : 1});
  }
  std::vector<int> groups(80);
  for (int i = 0; i < 80; ++i) groups[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)].group;
  int rejected = 0;
  const int trials = 2000;
  for (int k = 0; k < trials; ++k) {
    std::shuffle(groups.begin(), groups.end(), rng);
    for (int i = 0; i < 80; ++i) base[static_cast<std::size_t>(i)].group = groups[static_cast<std::size_t>(i)];
    rejected += logrank_test(base).p_value < 0.05 ? 1 : 0;
  }
  const double rate = static_cast<double>(rejected) / trials;
  EXPECT_NEAR(rate, 0.05, 0.02);
}

TEST(ChiSquare, MatchesIncompleteGamma) {
  for (double x : {1e-8, 1e-3, 0.1, 0.5, 1.0, 2.0, 3.841458820694124, 10.0, 25.0, 60.0}) {
    const double expected = boost::math::gamma_q(0.5, x / 2.0);
    EXPECT_LT(std::abs(chi_square_sf_1dof(x) - expected) / expected, 1e-10) << "x = " << x;
  }
  EXPECT_EQ(chi_square_sf_1dof(0.0), 1.0);
}

TEST(ChiSquare, CriticalValue) {
  EXPECT_NEAR(chi_square_sf_1dof(3.841458820694124), 0.05, 1e-12);
}

}  // namespace
}  // namespace mahal
