#pragma once

#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "defcast/forecaster.hpp"
#include "defcast/kernels.hpp"
#include "defcast/trading_rules.hpp"

namespace defcast {

struct EquityPoint {
  std::size_t step;
  double position;  // C_i, signed shares held over the step
  double price;     // S_i
  double capital;   // 𝓚_i
  double cost = 0.0;
};

/// Capital trajectory with 𝓚_i = 𝓚_{i-1} + C_i (S_i - S_{i-1}) - cost_i.
struct EquityCurve {
  double initial_capital = 0.0;
  double initial_price = 0.0;
  std::vector<EquityPoint> points;

  double final_capital() const { return points.empty() ? initial_capital : points.back().capital; }
  double gain() const { return final_capital() - initial_capital; }
  /// (𝓚_N - 𝓚_0) / 𝓚_0 · 100.
  double profit_percent() const;
};

/// `step,position,price,capital,cost`, full precision.
void write_csv(std::ostream& os, const EquityCurve& curve);

namespace strategy {

/// M¹: one share when p̃ > S̃, else flat.
struct RiseOnly {};
/// Dealing for a fall: short one share when p̃ <= S̃, else flat.
struct FallOnly {};
/// M: +1 when p̃ > S̃, -1 otherwise.
struct RiseFall {};
/// Mˡ = l·M.
struct Scaled {
  int l;
};
struct BuyHold {};
/// Trader D: D(x_i) shares.
struct Stationary {
  std::variant<InducedFunction, DecisionRule> rule;
};
/// Working capital min(𝓚_0, 𝓚_{i-1}) invested on every entry step.
struct DefensiveCapital {
  double cost_rate = 0.0;
};

}  // namespace strategy

using StrategyKind = std::variant<strategy::RiseOnly, strategy::FallOnly, strategy::RiseFall,
                                  strategy::Scaled, strategy::BuyHold, strategy::Stationary,
                                  strategy::DefensiveCapital>;

/// 1 iff p̃ > S̃.
int m1_decision(double p_tilde, double s_tilde);
/// +1 iff p̃ > S̃, otherwise -1.
int m_decision(double p_tilde, double s_tilde);

/// Prices S_0..S_n in [0,1] and signals x_1..x_n. Empty signals mean
/// x_i = S_{i-1}.
struct MarketPath {
  std::vector<double> prices;
  std::vector<double> signals;

  std::size_t steps() const { return prices.empty() ? 0 : prices.size() - 1; }
  double signal(std::size_t i) const { return signals.empty() ? prices[i - 1] : signals[i - 1]; }
};

/// One round of the forecasting side of the trading protocol.
struct TradeStep {
  double forecast;          // p_i
  double rounded_forecast;  // p̃_i
  double rounded_price;     // S̃_{i-1}
  Point rounded_info;       // x̃_i
  double signal;            // x_i
};

/// Runs the forecaster through the path: x̄_i = S_{i-1} (k = 1) or
/// (S_{i-1}, x_i) (k = 2), outcome y_i = S_i.
std::vector<TradeStep> forecast_path(const MarketPath& path, ForecastSession& session);

/// Applies a strategy to precomputed forecasting steps so several strategies
/// can share one set of randomization draws.
EquityCurve apply_strategy(std::span<const double> prices, const StrategyKind& kind,
                           std::span<const TradeStep> steps, double shares = 1.0,
                           double initial_capital = 0.0);

EquityCurve run_strategy(const MarketPath& path, const StrategyKind& kind,
                         ForecastSession& session, double shares = 1.0,
                         double initial_capital = 0.0);

/// Defensive trading: buy 𝓛/S_{i-1} shares with 𝓛 = min(𝓚_0, 𝓚_{i-1}) on
/// entry steps, stop for good once 𝓛 <= 0, and pay cost_rate·M_i·S_{i-1}
/// per entry.
EquityCurve defensive_run(std::span<const double> prices, std::span<const TradeStep> steps,
                          double initial_capital, double cost_rate = 0.0);

/// Rise-strategy regret: (4/3)(7e-1)(cF²+1)^{1/4} n^{3/4+ε}
///   + (normF/normInf) sqrt((cF²+1)n) + hoeffding_bound(n, δ).
double regret_bound_rise(std::size_t n, double cF, double epsilon, double delta, double norm_f,
                         double norm_inf);

/// Rise-and-fall regret: (8/3)(5e-2)(cF²+1)^{1/4} n^{3/4+ε}
///   + (normF/normInf) sqrt((cF²+1)n) + 2·hoeffding_bound(n, δ).
double regret_bound_rise_fall(std::size_t n, double cF, double epsilon, double delta,
                              double norm_f, double norm_inf);

/// Regret against decision rules with m values:
/// 5(m+1)e n^{4/5+ε} + (m+1)(e-1)(4/3) n^{3/4+ε} + (m+1) sqrt((n/2) ln(2m/δ)).
double regret_bound_decision_rule(std::size_t n, std::size_t m, double epsilon, double delta);

/// Σ D(x_i)(S_i - S_{i-1}).
double stationary_gain(const MarketPath& path, const InducedFunction& d);

}  // namespace defcast
