#include "defcast/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace defcast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

CheckingRule CheckingRule::intervals(std::vector<Interval> intervals) {
  if (intervals.empty()) throw std::domain_error("checking rule: no intervals");
  for (const auto& iv : intervals) {
    if (!(iv.lo >= 0.0 && iv.hi <= 1.0 && iv.lo <= iv.hi)) {
      throw std::domain_error("checking rule: interval outside [0,1]");
    }
  }
  return CheckingRule(rule::IntervalProduct{std::move(intervals)});
}

CheckingRule CheckingRule::decision_region(DecisionRule d, std::size_t value_index,
                                           std::size_t coordinate) {
  if (value_index >= d.range_size()) throw std::domain_error("checking rule: value index out of range");
  return CheckingRule(rule::DecisionRegion{std::move(d), value_index, coordinate});
}

bool CheckingRule::contains(double p, std::span<const double> info) const {
  return std::visit(
      Overloaded{
          [&](const rule::IntervalProduct& r) {
            if (r.intervals.size() != info.size() + 1) {
              throw std::domain_error("checking rule: expected " +
                                      std::to_string(r.intervals.size() - 1) +
                                      " information coordinates");
            }
            if (!r.intervals[0].contains(p)) return false;
            for (std::size_t s = 0; s < info.size(); ++s) {
              if (!r.intervals[s + 1].contains(info[s])) return false;
            }
            return true;
          },
          [&](const rule::ForecastAboveInfo&) {
            if (info.empty()) throw std::domain_error("checking rule: needs information");
            return p > info[0];
          },
          [&](const rule::ForecastAtMostInfo&) {
            if (info.empty()) throw std::domain_error("checking rule: needs information");
            return p <= info[0];
          },
          [&](const rule::DecisionRegion& r) {
            if (r.coordinate >= info.size()) {
              throw std::domain_error("checking rule: decision coordinate out of range");
            }
            return r.decision.value_index(info[r.coordinate]) == r.value_index;
          },
      },
      variant_);
}

std::string CheckingRule::label() const {
  return std::visit(Overloaded{
                        [](const rule::IntervalProduct& r) {
                          std::ostringstream os;
                          for (std::size_t s = 0; s < r.intervals.size(); ++s) {
                            if (s) os << 'x';
                            os << '[' << r.intervals[s].lo << ' ' << r.intervals[s].hi
                               << (r.intervals[s].closed_hi ? ']' : ')');
                          }
                          return os.str();
                        },
                        [](const rule::ForecastAboveInfo&) { return std::string("p>x0"); },
                        [](const rule::ForecastAtMostInfo&) { return std::string("p<=x0"); },
                        [](const rule::DecisionRegion& r) {
                          std::ostringstream os;
                          os << "D(x" << r.coordinate
                             << ")=" << r.decision.distinct_values()[r.value_index];
                          return os.str();
                        },
                    },
                    variant_);
}

CalibrationReport calibration_error(const std::vector<CheckingRule>& rules,
                                    std::span<const CalibrationSample> transcript) {
  if (transcript.empty()) throw std::domain_error("calibration: empty transcript");
  CalibrationReport report;
  report.n = transcript.size();
  report.rules.reserve(rules.size());
  for (const auto& r : rules) {
    RuleScore score;
    score.label = r.label();
    score.bound = std::numeric_limits<double>::quiet_NaN();
    for (const auto& t : transcript) {
      if (r.contains(t.forecast, t.info)) score.cumulative += t.outcome - t.forecast;
    }
    score.normalized = score.cumulative / static_cast<double>(report.n);
    report.rules.push_back(std::move(score));
  }
  return report;
}

void attach_calibration_bounds(CalibrationReport& report, std::size_t k, double cF, double epsilon,
                            double delta) {
  report.calibration = calibration_bound(k, cF, epsilon, report.n);
  report.hoeffding = hoeffding_bound(report.n, delta);
  for (auto& r : report.rules) r.bound = report.calibration + report.hoeffding;
}

void write_csv(std::ostream& os, const CalibrationReport& report) {
  os << "rule_id,label,cumulative,normalized,bound\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < report.rules.size(); ++i) {
    const auto& r = report.rules[i];
    os << i << ',' << r.label << ',' << r.cumulative << ',' << r.normalized << ',' << r.bound
       << '\n';
  }
}

double calibration_bound(std::size_t k, double cF, double epsilon, std::size_t n) {
  const double kd = static_cast<double>(k);
  return 4.0 * std::numbers::e * std::pow((kd + 1.0) / 2.0, 2.0 / (kd + 3.0)) *
         std::pow(cF * cF + 1.0, 1.0 / (kd + 3.0)) *
         std::pow(static_cast<double>(n), 1.0 - 1.0 / (kd + 3.0) + epsilon);
}

double hoeffding_bound(std::size_t n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("hoeffding bound: delta must lie in (0,1)");
  return std::sqrt(static_cast<double>(n) / 2.0 * std::log(2.0 / delta));
}

double fixed_delta_bound(std::size_t n, double grid_delta, std::size_t k, double cF, double delta) {
  const double nd = static_cast<double>(n);
  return grid_delta * nd +
         std::sqrt((cF * cF + 1.0) * nd / std::pow(grid_delta, static_cast<double>(k) + 1.0)) +
         hoeffding_bound(n, delta);
}

double rkhs_residual(const InducedFunction& d, std::span<const SignalSample> transcript) {
  double acc = 0.0;
  for (const auto& t : transcript) acc += d(t.signal) * (t.outcome - t.forecast);
  return std::abs(acc);
}

double rkhs_residual_bound(const InducedFunction& d, double cF, std::size_t n) {
  return induced_norm(d) * std::sqrt((cF * cF + 1.0) * static_cast<double>(n));
}

}  // namespace defcast
