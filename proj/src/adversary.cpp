#include "defcast/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace defcast {

std::vector<double> adversarial_prices(std::span<const double> signals) {
  std::vector<double> s;
  s.reserve(signals.size() + 1);
  s.push_back(0.5);
  for (std::size_t i = 1; i <= signals.size(); ++i) {
    const double move = std::ldexp(1.0, -static_cast<int>(i + 1));
    s.push_back(signals[i - 1] > 0.5 ? s.back() - move : s.back() + move);
  }
  return s;
}

int adversary_rule(double x) { return x > 0.5 ? -1 : 1; }

StrategySampler StrategySampler::uniform_sign() {
  return {0.5, [](RandomSource& rng) { return rng.uniform() < 0.5 ? 1.0 : -1.0; }};
}

StrategySampler StrategySampler::constant(double value) {
  return {value > 0.0 ? 1.0 : 0.0, [value](RandomSource&) { return value; }};
}

OutperformanceReport verify_outperformance(const StrategySampler& sampler, std::size_t n,
                                           std::size_t runs, std::uint64_t seed) {
  if (!(sampler.prob_positive >= 0.0 && sampler.prob_positive <= 1.0)) {
    throw std::domain_error("adversary: P{M > 0} must lie in [0,1]");
  }
  if (runs == 0) throw std::domain_error("adversary: need at least one run");

  OutperformanceReport rep;
  rep.n = n;
  rep.runs = runs;
  rep.signals.assign(n, sampler.prob_positive);
  rep.prices = adversarial_prices(rep.signals);
  for (std::size_t i = 1; i <= n; ++i) {
    const int d = adversary_rule(rep.signals[i - 1]);
    rep.rule_decisions.push_back(d);
    rep.rule_gain += d * (rep.prices[i] - rep.prices[i - 1]);
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    RandomSource rng = RandomSource::derive(seed, r);
    double gain = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double m = sampler.draw(rng);
      if (!(std::abs(m) <= 1.0)) throw std::domain_error("adversary: strategy draw exceeds 1 in magnitude");
      if (r == 0) rep.first_run_draws.push_back(m);
      gain += m * (rep.prices[i] - rep.prices[i - 1]);
    }
    sum += gain;
    sum_sq += gain * gain;
  }
  const double rd = static_cast<double>(runs);
  rep.mean_strategy_gain = sum / rd;
  rep.strategy_gain_stddev =
      runs > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / rd) / (rd - 1.0))) : 0.0;
  rep.statistic = n == 0 ? 0.0
                         : (rep.mean_strategy_gain - 0.5 * rep.rule_gain) / static_cast<double>(n);
  return rep;
}

void write_csv(std::ostream& os, const OutperformanceReport& report) {
  os << std::setprecision(17);
  os << "i,signal,price,rule_decision,strategy_draw\n";
  os << 0 << ",," << report.prices.front() << ",,\n";
  for (std::size_t i = 1; i < report.prices.size(); ++i) {
    os << i << ',' << report.signals[i - 1] << ',' << report.prices[i] << ','
       << report.rule_decisions[i - 1] << ',' << report.first_run_draws[i - 1] << '\n';
  }
}

}  // namespace defcast
