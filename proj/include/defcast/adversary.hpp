#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "defcast/random.hpp"

namespace defcast {

/// Prices that punish any i.i.d. strategy: S_0 = 1/2 and the i-th move is
/// -2^{-(i+1)} when x_i > 1/2, +2^{-(i+1)} otherwise. Moves are exact in
/// double precision up to about 50 rounds; later ones vanish into rounding.
std::vector<double> adversarial_prices(std::span<const double> signals);

/// -1 iff x > 1/2, otherwise +1.
int adversary_rule(double x);

/// An i.i.d. randomized trading strategy with |M̃| <= 1. prob_positive is
/// the declared P{M̃ > 0}, handed to the market as the signal.
struct StrategySampler {
  double prob_positive;
  std::function<double(RandomSource&)> draw;

  static StrategySampler uniform_sign();
  static StrategySampler constant(double value);
};

struct OutperformanceReport {
  std::size_t n = 0;
  std::size_t runs = 0;
  double mean_strategy_gain = 0.0;    // average over runs of Σ M̃_i ΔS_i
  double strategy_gain_stddev = 0.0;  // across runs
  double rule_gain = 0.0;             // Σ D(x_i) ΔS_i
  /// (1/n)(mean strategy gain - rule gain / 2); <= 0 means D wins twice over.
  double statistic = 0.0;
  /// Upper bound 1/4 on the expected strategy gain.
  double expected_gain_bound = 0.25;
  std::vector<double> signals;
  std::vector<double> prices;          // S_0..S_n
  std::vector<int> rule_decisions;     // D(x_1)..D(x_n)
  std::vector<double> first_run_draws; // M̃_1..M̃_n of run 0
};

/// Monte Carlo check of the construction. Run r uses
/// RandomSource::derive(seed, r). Throws std::domain_error if a draw has
/// magnitude above 1 or prob_positive lies outside [0,1].
OutperformanceReport verify_outperformance(const StrategySampler& sampler, std::size_t n,
                                           std::size_t runs, std::uint64_t seed);

/// One row per round: `i,signal,price,rule_decision,strategy_draw`.
void write_csv(std::ostream& os, const OutperformanceReport& report);

}  // namespace defcast
