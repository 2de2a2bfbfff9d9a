#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "defcast/calibration.hpp"
#include "harness.hpp"

using namespace defcast;

namespace {

CheckingRule full_interval() { return CheckingRule::intervals({{0.0, 1.0, true}, {0.0, 1.0, true}}); }

}  // namespace

TEST(CalibrationError, PerfectForecastsScoreZero) {
  std::vector<CalibrationSample> t;
  for (int i = 0; i < 10; ++i) t.push_back({i % 2 ? 1.0 : 0.0, {0.3}, i % 2 ? 1.0 : 0.0});
  const auto r = calibration_error({full_interval(), CheckingRule::forecast_above_info()}, t);
  for (const auto& s : r.rules) EXPECT_EQ(s.cumulative, 0.0);
}

TEST(CalibrationError, AlternatingOutcomesCancel) {
  std::vector<CalibrationSample> t;
  for (int i = 0; i < 100; ++i) t.push_back({0.5, {0.2}, double(i % 2)});
  EXPECT_EQ(calibration_error({full_interval()}, t).rules[0].cumulative, 0.0);
}

TEST(CalibrationError, ConstantBiasAccumulates) {
  std::vector<CalibrationSample> t(100, CalibrationSample{0.5, {0.2}, 1.0});
  const auto r = calibration_error({full_interval()}, t);
  EXPECT_EQ(r.n, 100u);
  EXPECT_DOUBLE_EQ(r.rules[0].cumulative, 50.0);
  EXPECT_DOUBLE_EQ(r.rules[0].normalized, 0.5);
  EXPECT_TRUE(std::isnan(r.rules[0].bound));
}

TEST(CalibrationError, RejectsEmptyAndMismatchedInput) {
  EXPECT_THROW(calibration_error({full_interval()}, {}), std::domain_error);
  std::vector<CalibrationSample> t{{0.5, {0.1, 0.2}, 1.0}};
  EXPECT_THROW(calibration_error({full_interval()}, t), std::domain_error);
}

TEST(CheckingRule, Membership) {
  const double lo[1] = {0.3};
  EXPECT_TRUE(CheckingRule::forecast_above_info().contains(0.4, lo));
  EXPECT_FALSE(CheckingRule::forecast_above_info().contains(0.3, lo));
  EXPECT_TRUE(CheckingRule::forecast_at_most_info().contains(0.3, lo));
  const auto half_open = CheckingRule::intervals({{0.0, 0.5}, {0.0, 1.0, true}});
  EXPECT_TRUE(half_open.contains(0.0, lo));
  EXPECT_FALSE(half_open.contains(0.5, lo));
  const DecisionRule d({0.5}, {1.0, -1.0});
  const auto region = CheckingRule::decision_region(d, d.value_index(0.7), 0);
  const double hi[1] = {0.7};
  EXPECT_TRUE(region.contains(0.1, hi));
  EXPECT_FALSE(region.contains(0.1, lo));
}

TEST(CalibrationError, MatchesRuleByRuleSum) {
  ForecastSession s(ForecasterConfig{}, RandomSource(3));
  const auto run = harness::drive(s, 400, harness::random_walk(), 4);
  std::vector<CalibrationSample> t;
  for (std::size_t i = 0; i < run.rounds.size(); ++i) {
    t.push_back({run.draws[i].forecast, run.draws[i].info, run.rounds[i].y});
  }
  std::vector<CheckingRule> rules;
  for (int b = 0; b < 5; ++b) rules.push_back(CheckingRule::intervals({{b / 5.0, (b + 1) / 5.0, b == 4}, {0, 1, true}}));
  const auto r = calibration_error(rules, t);
  for (int b = 0; b < 5; ++b) {
    double expect = 0.0;
    for (const auto& x : t) {
      if (x.forecast >= b / 5.0 && (b == 4 ? x.forecast <= 1.0 : x.forecast < (b + 1) / 5.0)) expect += x.outcome - x.forecast;
    }
    EXPECT_NEAR(r.rules[b].cumulative, expect, 1e-12);
    EXPECT_LE(std::abs(r.rules[b].cumulative), double(t.size()));
  }
  // Adding a round moves each cumulative sum by at most one.
  auto longer = t;
  longer.push_back({1.0, {0.5}, 0.0});
  const auto r2 = calibration_error(rules, longer);
  for (int b = 0; b < 5; ++b) EXPECT_LE(std::abs(r2.rules[b].cumulative - r.rules[b].cumulative), 1.0);
}

TEST(Bounds, CalibrationBoundValues) {
  const double e = std::numbers::e;
  EXPECT_NEAR(calibration_bound(1, 1.0, 0.05, 10000), 4 * e * std::pow(2.0, 0.25) * std::pow(1e4, 0.8), 1e-9);
  EXPECT_NEAR(calibration_bound(1, 1.0, 0.05, 10000), 2.049e4, 5.0);
  EXPECT_NEAR(calibration_bound(1, 0.0, 0.0, 1), 4 * e, 1e-12);
  EXPECT_NEAR(calibration_bound(2, 0.0, 0.0, 1), 4 * e * std::pow(1.5, 0.4), 1e-12);
}

TEST(Bounds, HoeffdingValues) {
  EXPECT_NEAR(hoeffding_bound(5000, 0.05), std::sqrt(2500 * std::log(40.0)), 1e-12);
  EXPECT_NEAR(hoeffding_bound(5000, 0.05), 96.03, 0.01);
  EXPECT_EQ(hoeffding_bound(0, 0.05), 0.0);
  EXPECT_THROW(hoeffding_bound(10, 2.0), std::domain_error);
  EXPECT_THROW(hoeffding_bound(10, 0.0), std::domain_error);
}

TEST(Bounds, FixedDeltaValue) {
  const double expect = 0.05 * 10000 + std::sqrt(10000 / std::pow(0.05, 2)) + hoeffding_bound(10000, 0.0025);
  EXPECT_NEAR(fixed_delta_bound(10000, 0.05, 1, 0.0, 0.0025), expect, 1e-9);
}

TEST(Bounds, AttachFillsEveryRule) {
  std::vector<CalibrationSample> t(10, CalibrationSample{0.5, {0.2}, 1.0});
  auto r = calibration_error({full_interval(), full_interval()}, t);
  attach_calibration_bounds(r, 1, 1.0, 0.1, 0.05);
  EXPECT_DOUBLE_EQ(r.calibration, calibration_bound(1, 1.0, 0.1, 10));
  EXPECT_DOUBLE_EQ(r.hoeffding, hoeffding_bound(10, 0.05));
  for (const auto& s : r.rules) EXPECT_DOUBLE_EQ(s.bound, r.calibration + r.hoeffding);
  std::ostringstream os;
  write_csv(os, r);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "rule_id,label,cumulative,normalized,bound");
}

TEST(RkhsResidual, TrivialCases) {
  const auto k = KernelSpec::sobolev();
  std::vector<SignalSample> t{{0.2, 0.3, 0.9}, {0.8, 0.5, 0.1}};
  EXPECT_EQ(rkhs_residual(InducedFunction::single(k, 0.5, 0.0), t), 0.0);
  std::vector<SignalSample> exact{{0.2, 0.3, 0.3}, {0.8, 0.5, 0.5}};
  EXPECT_EQ(rkhs_residual(InducedFunction::single(k, 0.5), exact), 0.0);
  EXPECT_NEAR(rkhs_residual(InducedFunction::single(k, 0.5), t),
              std::abs(oracle::sobolev(0.5, 0.2) * 0.6 - oracle::sobolev(0.5, 0.8) * 0.4), 1e-15);
}

TEST(RkhsResidual, BoundHoldsOnForecasterRun) {
  ForecasterConfig c;
  c.schedule = FixedDelta{0.1};
  c.side_kernel = KernelSpec::sobolev();
  ForecastSession s(c, RandomSource(21));
  const auto run = harness::drive(s, 500, harness::random_walk(), 22);
  std::vector<SignalSample> t;
  for (const auto& r : run.rounds) t.push_back({r.signal, r.p, r.y});
  const double cf = embedding_constant(KernelSpec::sobolev());
  const auto d = InducedFunction::single(KernelSpec::sobolev(), 0.5);
  EXPECT_DOUBLE_EQ(rkhs_residual_bound(d, cf, 500), induced_norm(d) * std::sqrt((cf * cf + 1) * 500));
  EXPECT_LE(rkhs_residual(d, t), rkhs_residual_bound(d, cf, 500) * (1 + 1e-6));
}
