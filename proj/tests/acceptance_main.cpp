// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "defcast/adversary.hpp"
#include "defcast/arma.hpp"
#include "defcast/calibration.hpp"
#include "defcast/chain.hpp"
#include "defcast/experiment.hpp"
#include "defcast/forecaster.hpp"
#include "defcast/kernels.hpp"
#include "defcast/price_series.hpp"
#include "defcast/rounding_grid.hpp"
#include "defcast/trading.hpp"
#include "harness.hpp"
#include "oracles.hpp"

using namespace defcast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<void(Outcome&)> body;
};

const double kCoth1 = std::cosh(1.0) / std::sinh(1.0);
const std::vector<std::uint64_t> kSeeds{101, 202, 303};

// Runs shared by the supermartingale, residual-norm and induced-function
// criteria.
std::vector<harness::Run>& sobolev_runs() {
  static std::vector<harness::Run> runs = [] {
    std::vector<harness::Run> out;
    for (auto seed : kSeeds) {
      ForecasterConfig c;
      c.schedule = FixedDelta{0.1};
      c.side_kernel = KernelSpec::sobolev();
      c.max_history = 0;
      ForecastSession s(c, RandomSource(seed));
      out.push_back(harness::drive(s, 2000, harness::random_walk(), seed + 1));
    }
    return out;
  }();
  return runs;
}

std::vector<oracle::Round> prefix(const harness::Run& run, std::size_t n) {
  return {run.rounds.begin(), run.rounds.begin() + static_cast<std::ptrdiff_t>(n)};
}

void unbiasedness(Outcome& o) {
  RandomSource rng(7);
  double worst = 0.0;
  for (int intervals : {4, 10, 64}) {
    const RoundingGrid grid(intervals);
    for (int t = 0; t < 1000; ++t) {
      const double p = rng.uniform();
      double mean = 0.0;
      for (const auto& e : weights(grid, p)) mean += e.weight * grid.point(e.index[0]);
      const auto dense = oracle::dense_weights(intervals, p);
      double oracle_mean = 0.0;
      for (int i = 0; i <= intervals; ++i) oracle_mean += dense[i] * double(i) / intervals;
      worst = std::max({worst, std::abs(mean - p), std::abs(oracle_mean - p)});
    }
  }
  o.detail << "max |E[v] - p| = " << worst;
  o.require(worst <= 1e-12, "unbiased within 1e-12");
}

void supermartingale(Outcome& o) {
  double worst = -1e300;
  for (const auto& run : sobolev_runs()) {
    for (std::size_t n = 1; n < run.martingale.size(); ++n) {
      worst = std::max(worst, run.martingale[n] - run.martingale[n - 1]);
    }
  }
  o.detail << "3 x 2000 rounds, max increment " << worst;
  o.require(worst <= 1e-7, "M_n <= M_{n-1} + 1e-7");
}

void residual_norm(Outcome& o) {
  const double cf2 = kCoth1;
  const oracle::Kernel1 side = [](double a, double b) { return oracle::sobolev(a, b); };
  double worst_ratio = 0.0;
  double worst_identity = 0.0;
  for (const auto& run : sobolev_runs()) {
    for (std::size_t n : {500u, 2000u}) {
      const auto h = prefix(run, n);
      const double sq = oracle::residual_norm_sq(10, h, side);
      const double bound = std::sqrt((cf2 + 1.0) * double(n));
      worst_ratio = std::max(worst_ratio, std::sqrt(sq) / bound);
      o.require(std::sqrt(sq) <= bound * (1 + 1e-6), "N=" + std::to_string(n));
      // ‖Σ‖² = 2(𝓜_N - 1) + Σ ‖Φ_n‖² r_n² links the norm to the supermartingale.
      double diag = 0.0;
      for (const auto& r : h) {
        const std::vector<double> z{r.p, r.info[0]};
        diag += (oracle::rounding_kernel(10, z, z) + side(r.signal, r.signal)) * (r.y - r.p) * (r.y - r.p);
      }
      const double identity = 2.0 * (run.martingale[n] - 1.0) + diag;
      worst_identity = std::max(worst_identity, std::abs(identity - sq) / std::max(1.0, sq));
    }
  }
  o.detail << "max norm/bound " << worst_ratio << ", identity mismatch " << worst_identity;
  o.require(worst_identity <= 1e-8, "norm identity with the supermartingale");
}

void induced_functions(Outcome& o) {
  const auto k = KernelSpec::sobolev();
  const double cf = embedding_constant(k);
  const std::vector<Point> centers{{0.25}, {0.5}, {0.75}};
  const std::vector<std::vector<double>> coefficients{{1, 1, 1}, {1, -2, 1}, {0.5, 0, -1.5}};
  double worst = 0.0;
  for (const auto& alpha : coefficients) {
    const InducedFunction d(k, centers, alpha);
    double q = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) q += alpha[i] * alpha[j] * oracle::sobolev(centers[i][0], centers[j][0]);
    }
    o.require(std::abs(std::sqrt(q) - induced_norm(d)) <= 1e-12, "induced norm matches oracle");
    for (const auto& run : sobolev_runs()) {
      for (std::size_t n : {500u, 2000u}) {
        std::vector<SignalSample> t;
        double direct = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto& r = run.rounds[i];
          t.push_back({r.signal, r.p, r.y});
          double dx = 0.0;
          for (std::size_t j = 0; j < 3; ++j) dx += alpha[j] * oracle::sobolev(centers[j][0], r.signal);
          direct += dx * (r.y - r.p);
        }
        const double lhs = rkhs_residual(d, t);
        o.require(std::abs(lhs - std::abs(direct)) <= 1e-9 * std::max(1.0, lhs), "residual matches oracle");
        const double bound = std::sqrt(q) * std::sqrt((cf * cf + 1.0) * double(n));
        worst = std::max(worst, lhs / bound);
        o.require(lhs <= bound * (1 + 1e-6), "bound at n=" + std::to_string(n));
      }
    }
  }
  o.detail << "max |sum|/bound " << worst;
}

std::vector<CheckingRule> interval_rules() {
  std::vector<CheckingRule> rules;
  for (int b = 0; b < 10; ++b) {
    for (int h = 0; h < 2; ++h) {
      rules.push_back(CheckingRule::intervals({Interval{b / 10.0, (b + 1) / 10.0, b == 9},
                                               Interval{0.5 * h, 0.5 * (h + 1), h == 1}}));
    }
  }
  return rules;
}

void adversarial_calibration(Outcome& o) {
  const std::size_t n = 10000;
  const double bound = fixed_delta_bound(n, 0.05, 1, 0.0, 0.05 / 20);
  int passing = 0;
  for (auto seed : kSeeds) {
    ForecasterConfig c;
    c.schedule = FixedDelta{0.05};
    c.max_history = 0;
    ForecastSession s(c, RandomSource(seed));
    const auto run = harness::drive(s, n, harness::against_forecast(), seed);
    std::vector<CalibrationSample> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({run.draws[i].forecast, run.draws[i].info, run.rounds[i].y});
    const auto report = calibration_error(interval_rules(), t);
    double worst = 0.0;
    for (int b = 0; b < 10; ++b) {
      for (int h = 0; h < 2; ++h) {
        double direct = 0.0;
        for (const auto& x : t) {
          const bool in_p = x.forecast >= b / 10.0 && (b == 9 ? x.forecast <= 1.0 : x.forecast < (b + 1) / 10.0);
          const bool in_x = x.info[0] >= 0.5 * h && (h == 1 ? x.info[0] <= 1.0 : x.info[0] < 0.5);
          if (in_p && in_x) direct += x.outcome - x.forecast;
        }
        const double lib = report.rules[std::size_t(2 * b + h)].cumulative;
        o.require(std::abs(lib - direct) <= 1e-9, "rule sum matches direct sum");
        worst = std::max(worst, std::abs(lib));
      }
    }
    if (worst <= bound) ++passing;
    o.detail << "seed " << seed << " max |err| " << worst << "; ";
  }
  o.detail << "bound " << bound << ", " << passing << "/3 seeds";
  o.require(passing >= 2, "at least 2 of 3 seeds");
}

void regret(Outcome& o) {
  const std::size_t n = 5000;
  const auto k = KernelSpec::sobolev();
  const double cf = embedding_constant(k);
  const std::vector<Point> centers{{0.25}, {0.5}, {0.75}};
  const std::vector<std::vector<double>> coefficients{{1, 1, 1}, {1, -2, 1}, {0.5, 0, -1.5}};
  int passing = 0;
  for (auto seed : kSeeds) {
    RandomSource world(seed + 17);
    std::vector<double> prices{0.5};
    for (std::size_t i = 0; i < n; ++i) prices.push_back(std::clamp(prices.back() + 0.01 * world.normal(), 0.0, 1.0));
    ForecasterConfig c;
    c.schedule = DoublingTrick{0.25};
    c.side_kernel = k;
    c.max_history = 0;
    ForecastSession s(c, RandomSource(seed));
    const MarketPath path{prices, {}};
    const auto steps = forecast_path(path, s);
    const double gain = apply_strategy(prices, strategy::RiseFall{}, steps).gain();
    double direct_gain = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      direct_gain += (steps[i - 1].rounded_forecast > steps[i - 1].rounded_price ? 1.0 : -1.0) * (prices[i] - prices[i - 1]);
    }
    o.require(std::abs(gain - direct_gain) <= 1e-9, "strategy gain matches direct sum");
    bool all = true;
    for (const auto& alpha : coefficients) {
      const InducedFunction d(k, centers, alpha);
      const double competitor = stationary_gain(path, d) / sup_norm(d);
      const double bound = regret_bound_rise_fall(n, cf, 0.25, 0.1, induced_norm(d), sup_norm(d));
      if (gain < competitor - bound) all = false;
    }
    if (all) ++passing;
    o.detail << "seed " << seed << " gain " << gain << "; ";
  }
  o.detail << passing << "/3 seeds";
  o.require(passing >= 2, "at least 2 of 3 seeds");
}

void adversary(Outcome& o) {
  const std::size_t n = 50;
  const auto r = verify_outperformance(StrategySampler::uniform_sign(), n, 1000, 11);
  const double exact = 0.5 - std::ldexp(1.0, -int(n + 1));
  double direct = 0.0;
  for (std::size_t i = 1; i <= n; ++i) direct += (r.signals[i - 1] > 0.5 ? -1.0 : 1.0) * (r.prices[i] - r.prices[i - 1]);
  o.detail.precision(17);
  o.detail << "rule gain " << r.rule_gain << ", mean strategy gain " << r.mean_strategy_gain << ", statistic "
           << r.statistic;
  o.require(r.rule_gain == exact, "rule gain exactly 1/2 - 2^-51");
  o.require(direct == exact, "direct rule gain exact");
  o.require(std::abs(r.mean_strategy_gain) <= 0.05, "mean strategy gain within 0.05");
  o.require(r.statistic <= 0.05, "statistic <= 0.05");
}

void kernels(Outcome& o) {
  const auto s = KernelSpec::sobolev();
  const double k00 = eval(s, 0.0, 0.0), k01 = eval(s, 0.0, 1.0);
  o.require(std::abs(k00 - kCoth1) <= 1e-10, "K(0,0) = coth 1");
  o.require(std::abs(k01 - 1.0 / std::sinh(1.0)) <= 1e-10, "K(0,1) = 1/sinh 1");
  o.require(std::abs(oracle::sobolev(0, 0) - kCoth1) <= 1e-10, "oracle K(0,0)");
  double worst = 1e300;
  for (std::size_t dim : {1u, 2u}) {
    RandomSource rng(40 + dim);
    std::vector<Point> pts(50, Point(dim));
    for (auto& p : pts) {
      for (auto& v : p) v = rng.uniform();
    }
    const std::vector<KernelSpec> ks{KernelSpec::sobolev(dim), KernelSpec::gaussian(0.1, dim), KernelSpec::gaussian(1.0, dim),
                                     KernelSpec::cosine_half_pi(dim), KernelSpec::discretized(RoundingGrid(10), dim),
                                     KernelSpec::zero(dim),
                                     KernelSpec::sum({KernelSpec::sobolev(dim), KernelSpec::discretized(RoundingGrid(4), dim)})};
    for (const auto& k : ks) {
      const double e = min_eigenvalue(gram(k, pts));
      worst = std::min(worst, e);
      o.require(e >= -1e-8, k.name() + " PSD");
    }
  }
  o.detail << "K(0,0) " << k00 << ", K(0,1) " << k01 << ", min eigenvalue " << worst;
}

void chain(Outcome& o) {
  RandomSource rng(9);
  const auto series = simulate_test_stock(300, 1.4, 100.0, rng);
  const auto plan = plan_chain(series.size(), 100, 40, 5);
  ChainConfig cfg;
  cfg.forecaster.schedule = FixedDelta{0.05};
  cfg.forecaster.side_kernel = KernelSpec::sobolev();
  std::ostringstream seq, con;
  const auto a = run_chain(series.raw, plan, cfg, Execution::Sequential);
  write_transcript(seq, a.rows);
  write_transcript(con, run_chain(series.raw, plan, cfg, Execution::Concurrent, 4).rows);
  o.require(seq.str() == con.str(), "byte-identical transcripts");
  std::vector<int> hits(series.size(), 0);
  for (const auto& w : plan.windows) {
    for (std::size_t t = plan.live_begin(w); t < w.end; ++t) ++hits[t];
  }
  for (std::size_t t = 0; t < hits.size(); ++t) {
    if (hits[t] != (t >= 40 ? 1 : 0)) o.require(false, "live index " + std::to_string(t));
  }
  bool ordered = a.rows.size() == 260;
  for (std::size_t j = 0; ordered && j < a.rows.size(); ++j) ordered = a.rows[j].t == 40 + j;
  o.require(ordered, "transcript covers 40..299 once, in order");
  o.detail << plan.windows.size() << " windows, " << a.rows.size() << " live rows, " << seq.str().size()
           << " transcript bytes";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(split(line));
  return rows;
}

void end_to_end(Outcome& o) {
  const auto dir = fs::temp_directory_path() / "defcast_acceptance_e2e";
  fs::remove_all(dir);
  const std::string cmd =
      std::string(BACKTEST_BIN) + " run --test n=20000 --out " + dir.string() + " > " + (dir.string() + ".log") + " 2>&1";
  const int rc = std::system(cmd.c_str());
  o.require(rc == 0, "backtest exit code 0");
  if (rc != 0) return;
  const auto table = read_csv(dir / "results.csv");
  o.require(table.size() == 2, "one result row");
  if (table.size() != 2) return;
  o.require(table[0] == kProfitColumns, "exact profit column set");
  const std::vector<std::pair<std::size_t, std::string>> columns{
      {1, "buyhold"}, {2, "un_rise"}, {3, "un_fall"}, {4, "arma_rise"}, {5, "arma_fall"}};
  for (const auto& [col, label] : columns) {
    const auto curve = read_csv(dir / ("equity_TEST_" + label + ".csv"));
    if (curve.size() < 2) {
      o.require(false, "equity curve " + label);
      continue;
    }
    const double k0 = std::stod(curve[1][3]);
    const double kn = std::stod(curve.back()[3]);
    const double table_profit = std::stod(table[1][col]);
    o.require(table_profit == (kn - k0) / k0 * 100.0, label + " profit equals equity curve");
    o.detail << label << " " << table_profit << "% ";
  }
}

void arma(Outcome& o) {
  RandomSource rng(77);
  const double phi = 0.6, sigma = 0.02, mean = 0.5;
  std::vector<double> x{mean};
  for (int i = 0; i < 6000; ++i) x.push_back(mean + phi * (x.back() - mean) + sigma * rng.normal());
  const std::span<const double> all(x);
  const auto model = fit_arma(all.first(5000), 1, 0);
  double sse = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 5000; t < x.size(); ++t) {
    const double f = forecast_next(model, all.subspan(t - 50, 50));
    sse += (x[t] - f) * (x[t] - f);
    ++count;
  }
  const double rmse = std::sqrt(sse / double(count));
  o.detail << "phi " << model.ar[0] << ", held-out RMSE " << rmse << " vs sigma " << sigma;
  o.require(std::abs(model.ar[0] - phi) <= 0.05, "phi within 0.05");
  o.require(std::abs(rmse - sigma) <= 0.1 * sigma, "RMSE within 10% of sigma");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "rounding unbiasedness", 1, unbiasedness},
      {2, "supermartingale monotonicity", 60, supermartingale},
      {3, "weighted residual norm bound", 60, residual_norm},
      {4, "induced function residual bound", 60, induced_functions},
      {5, "calibration under adversarial outcomes", 300, adversarial_calibration},
      {6, "rise-fall regret inequality", 300, regret},
      {7, "adversary construction", 10, adversary},
      {8, "kernel correctness", 5, kernels},
      {9, "chain determinism and coverage", 5, chain},
      {10, "end-to-end synthetic backtest", 60, end_to_end},
      {11, "ARMA baseline", 5, arma},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.time_limit_s, "runtime under " + std::to_string(int(c.time_limit_s)) + " s");
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
