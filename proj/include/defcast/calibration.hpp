#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "defcast/kernels.hpp"
#include "defcast/trading_rules.hpp"

namespace defcast {

struct Interval {
  double lo;
  double hi;
  bool closed_hi = false;  // [lo, hi] instead of [lo, hi)

  bool contains(double v) const { return v >= lo && (closed_hi ? v <= hi : v < hi); }
};

namespace rule {

/// Product of intervals over (p, x̄_1, ..., x̄_k).
struct IntervalProduct {
  std::vector<Interval> intervals;
};
/// p > x̄[0].
struct ForecastAboveInfo {};
/// p <= x̄[0].
struct ForecastAtMostInfo {};
/// {(p, x̄) : D(x̄[coordinate]) = j-th distinct value of D}.
struct DecisionRegion {
  DecisionRule decision;
  std::size_t value_index;
  std::size_t coordinate;
};

}  // namespace rule

class CheckingRule {
 public:
  using Variant = std::variant<rule::IntervalProduct, rule::ForecastAboveInfo,
                               rule::ForecastAtMostInfo, rule::DecisionRegion>;

  static CheckingRule intervals(std::vector<Interval> intervals);
  static CheckingRule forecast_above_info() { return CheckingRule(rule::ForecastAboveInfo{}); }
  static CheckingRule forecast_at_most_info() { return CheckingRule(rule::ForecastAtMostInfo{}); }
  static CheckingRule decision_region(DecisionRule d, std::size_t value_index,
                                      std::size_t coordinate);

  /// Indicator I_S(p, x̄). Throws std::domain_error on dimension mismatch.
  bool contains(double p, std::span<const double> info) const;

  const Variant& variant() const noexcept { return variant_; }
  std::string label() const;

 private:
  explicit CheckingRule(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

struct CalibrationSample {
  double forecast;
  Point info;
  double outcome;
};

struct RuleScore {
  std::string label;
  double cumulative = 0.0;  // Σ I_S(p̃_i, x̃_i)(y_i - p̃_i)
  double normalized = 0.0;  // cumulative / n
  double bound = 0.0;       // NaN until attached
};

struct CalibrationReport {
  std::size_t n = 0;
  std::vector<RuleScore> rules;
  double calibration = 0.0;  // calibration_bound(k, cF, ε, n) when attached
  double hoeffding = 0.0;  // hoeffding_bound(n, δ) when attached
};

CalibrationReport calibration_error(const std::vector<CheckingRule>& rules,
                                    std::span<const CalibrationSample> transcript);

/// Fills every rule's bound with calibration_bound + hoeffding_bound.
void attach_calibration_bounds(CalibrationReport& report, std::size_t k, double cF, double epsilon,
                            double delta);

/// Writes `rule_id,label,cumulative,normalized,bound`.
void write_csv(std::ostream& os, const CalibrationReport& report);

/// 4e ((k+1)/2)^{2/(k+3)} (cF²+1)^{1/(k+3)} n^{1 - 1/(k+3) + ε}.
double calibration_bound(std::size_t k, double cF, double epsilon, std::size_t n);

/// sqrt((n/2) ln(2/δ)). Throws std::domain_error unless 0 < δ < 1.
double hoeffding_bound(std::size_t n, double delta);

/// Fixed-resolution bound Δn + sqrt((cF²+1) n / Δ^{k+1}) + hoeffding_bound(n, δ).
double fixed_delta_bound(std::size_t n, double grid_delta, std::size_t k, double cF, double delta);

struct SignalSample {
  double signal;
  double forecast;
  double outcome;
};

/// |Σ D(x_i)(y_i - p_i)|.
double rkhs_residual(const InducedFunction& d, std::span<const SignalSample> transcript);

/// ‖D‖_F sqrt((cF²+1) n).
double rkhs_residual_bound(const InducedFunction& d, double cF, std::size_t n);

}  // namespace defcast
