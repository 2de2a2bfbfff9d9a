#include "defcast/trading.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "defcast/calibration.hpp"

namespace defcast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_scaled(std::span<const double> prices) {
  for (double s : prices) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::domain_error("trading: price " + std::to_string(s) + " is not scaled to [0,1]");
    }
  }
}

void check_regret_args(std::size_t n, double delta, double norm_inf) {
  if (n < 1) throw std::domain_error("regret bound: n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("regret bound: delta must lie in (0,1)");
  if (!(norm_inf > 1e-12)) throw std::domain_error("regret bound: competitor is trivial");
}

}  // namespace

DecisionRule::DecisionRule(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1) {
    throw std::domain_error("decision rule: need one more value than breakpoints");
  }
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()) ||
      std::adjacent_find(breakpoints_.begin(), breakpoints_.end()) != breakpoints_.end()) {
    throw std::domain_error("decision rule: breakpoints must be strictly increasing");
  }
  distinct_ = values_;
  std::sort(distinct_.begin(), distinct_.end());
  distinct_.erase(std::unique(distinct_.begin(), distinct_.end()), distinct_.end());
}

std::size_t DecisionRule::piece(double x) const {
  return static_cast<std::size_t>(
      std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
}

std::size_t DecisionRule::value_index(double x) const {
  const double v = (*this)(x);
  return static_cast<std::size_t>(std::lower_bound(distinct_.begin(), distinct_.end(), v) -
                                  distinct_.begin());
}

double DecisionRule::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double EquityCurve::profit_percent() const {
  if (initial_capital == 0.0) throw std::domain_error("equity curve: zero initial capital");
  return (final_capital() - initial_capital) / initial_capital * 100.0;
}

void write_csv(std::ostream& os, const EquityCurve& curve) {
  os << "step,position,price,capital,cost\n";
  os << std::setprecision(17);
  os << 0 << ',' << 0 << ',' << curve.initial_price << ',' << curve.initial_capital << ',' << 0
     << '\n';
  for (const auto& p : curve.points) {
    os << p.step << ',' << p.position << ',' << p.price << ',' << p.capital << ',' << p.cost
       << '\n';
  }
}

int m1_decision(double p_tilde, double s_tilde) { return p_tilde > s_tilde ? 1 : 0; }

int m_decision(double p_tilde, double s_tilde) { return p_tilde > s_tilde ? 1 : -1; }

std::vector<TradeStep> forecast_path(const MarketPath& path, ForecastSession& session) {
  check_scaled(path.prices);
  if (!path.signals.empty() && path.signals.size() != path.steps()) {
    throw std::domain_error("trading: need one signal per step");
  }
  const std::size_t k = session.info_dim();
  if (k != 1 && k != 2) throw std::domain_error("trading: information dimension must be 1 or 2");

  std::vector<TradeStep> steps;
  steps.reserve(path.steps());
  Point info(k);
  for (std::size_t i = 1; i <= path.steps(); ++i) {
    const double signal = path.signal(i);
    info[0] = path.prices[i - 1];
    if (k == 2) info[1] = signal;
    const double p = session.next_forecast(info, signal);
    auto draw = session.randomize_round(p, info);
    steps.push_back({p, draw.forecast, draw.info[0], std::move(draw.info), signal});
    session.update(p, info, signal, path.prices[i]);
  }
  return steps;
}

EquityCurve apply_strategy(std::span<const double> prices, const StrategyKind& kind,
                           std::span<const TradeStep> steps, double shares,
                           double initial_capital) {
  if (prices.size() != steps.size() + 1) {
    throw std::domain_error("trading: need one forecasting step per price change");
  }
  if (const auto* d = std::get_if<strategy::DefensiveCapital>(&kind)) {
    return defensive_run(prices, steps, initial_capital, d->cost_rate);
  }
  if (const auto* sc = std::get_if<strategy::Scaled>(&kind); sc && sc->l < 1) {
    throw std::domain_error("trading: scale l must be a positive integer");
  }

  EquityCurve curve;
  curve.initial_capital = initial_capital;
  curve.initial_price = prices[0];
  curve.points.reserve(steps.size());
  double capital = initial_capital;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    const TradeStep& st = steps[i - 1];
    const double position = std::visit(
        Overloaded{
            [&](const strategy::RiseOnly&) {
              return shares * m1_decision(st.rounded_forecast, st.rounded_price);
            },
            [&](const strategy::FallOnly&) {
              return -shares * (1 - m1_decision(st.rounded_forecast, st.rounded_price));
            },
            [&](const strategy::RiseFall&) {
              return shares * m_decision(st.rounded_forecast, st.rounded_price);
            },
            [&](const strategy::Scaled& s) {
              return s.l * shares * m_decision(st.rounded_forecast, st.rounded_price);
            },
            [&](const strategy::BuyHold&) { return shares; },
            [&](const strategy::Stationary& s) {
              return std::visit([&](const auto& rule) { return rule(st.signal); }, s.rule);
            },
            [](const strategy::DefensiveCapital&) { return 0.0; },
        },
        kind);
    capital += position * (prices[i] - prices[i - 1]);
    curve.points.push_back({i, position, prices[i], capital, 0.0});
  }
  return curve;
}

EquityCurve run_strategy(const MarketPath& path, const StrategyKind& kind,
                         ForecastSession& session, double shares, double initial_capital) {
  const auto steps = forecast_path(path, session);
  return apply_strategy(path.prices, kind, steps, shares, initial_capital);
}

EquityCurve defensive_run(std::span<const double> prices, std::span<const TradeStep> steps,
                          double initial_capital, double cost_rate) {
  if (!(initial_capital > 0.0)) throw std::domain_error("defensive trading: K0 must be positive");
  if (!(cost_rate >= 0.0)) throw std::domain_error("defensive trading: negative cost rate");
  if (prices.size() != steps.size() + 1) {
    throw std::domain_error("defensive trading: need one forecasting step per price change");
  }
  EquityCurve curve;
  curve.initial_capital = initial_capital;
  curve.initial_price = prices[0];
  curve.points.reserve(steps.size());
  double capital = initial_capital;
  bool stopped = false;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    const double working = std::min(initial_capital, capital);
    if (working <= 0.0) stopped = true;
    double shares = 0.0;
    double cost = 0.0;
    const bool entry = m1_decision(steps[i - 1].rounded_forecast, steps[i - 1].rounded_price) == 1;
    if (!stopped && entry && prices[i - 1] > 0.0) {
      shares = working / prices[i - 1];
      cost = cost_rate * shares * prices[i - 1];
    }
    capital += shares * (prices[i] - prices[i - 1]) - cost;
    curve.points.push_back({i, shares, prices[i], capital, cost});
  }
  return curve;
}

double regret_bound_rise(std::size_t n, double cF, double epsilon, double delta, double norm_f,
                         double norm_inf) {
  check_regret_args(n, delta, norm_inf);
  const double nd = static_cast<double>(n);
  const double c2 = cF * cF + 1.0;
  return 4.0 / 3.0 * (7.0 * std::numbers::e - 1.0) * std::pow(c2, 0.25) *
             std::pow(nd, 0.75 + epsilon) +
         norm_f / norm_inf * std::sqrt(c2 * nd) + hoeffding_bound(n, delta);
}

double regret_bound_rise_fall(std::size_t n, double cF, double epsilon, double delta,
                              double norm_f, double norm_inf) {
  check_regret_args(n, delta, norm_inf);
  const double nd = static_cast<double>(n);
  const double c2 = cF * cF + 1.0;
  return 8.0 / 3.0 * (5.0 * std::numbers::e - 2.0) * std::pow(c2, 0.25) *
             std::pow(nd, 0.75 + epsilon) +
         norm_f / norm_inf * std::sqrt(c2 * nd) + 2.0 * hoeffding_bound(n, delta);
}

double regret_bound_decision_rule(std::size_t n, std::size_t m, double epsilon, double delta) {
  if (n < 1 || m < 1) throw std::domain_error("regret bound: n and m must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("regret bound: delta must lie in (0,1)");
  const double nd = static_cast<double>(n);
  const double m1 = static_cast<double>(m) + 1.0;
  const double e = std::numbers::e;
  return 5.0 * m1 * e * std::pow(nd, 0.8 + epsilon) +
         m1 * (e - 1.0) * 4.0 / 3.0 * std::pow(nd, 0.75 + epsilon) +
         m1 * std::sqrt(nd / 2.0 * std::log(2.0 * static_cast<double>(m) / delta));
}

double stationary_gain(const MarketPath& path, const InducedFunction& d) {
  double g = 0.0;
  for (std::size_t i = 1; i <= path.steps(); ++i) {
    g += d(path.signal(i)) * (path.prices[i] - path.prices[i - 1]);
  }
  return g;
}

}  // namespace defcast
