// backtest: run the chain-method trading experiment, the calibration suite
// or the adversary demo.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "defcast/adversary.hpp"
#include "defcast/calibration.hpp"
#include "defcast/errors.hpp"
#include "defcast/experiment.hpp"
#include "defcast/forecaster.hpp"

namespace fs = std::filesystem;
using namespace defcast;

namespace {

// Parses `key=value` tokens of --test.
void apply_test_tokens(const std::vector<std::string>& tokens, TestStockParams& t) {
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("--test expects key=value, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "n") {
        const long long n = std::stoll(value, &used);
        if (n < 0) throw ConfigError("--test n must be non-negative");
        t.n = static_cast<std::size_t>(n);
      } else if (key == "sigma") {
        t.sigma = std::stod(value, &used);
      } else if (key == "s0") {
        t.s0 = std::stod(value, &used);
      } else {
        throw ConfigError("--test: unknown key '" + key + "'");
      }
      if (used != value.size()) throw ConfigError("--test: bad value '" + value + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("--test: bad value '" + value + "'");
    }
  }
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

struct RunArgs {
  std::string config_path;
  std::string data;
  std::vector<std::string> test;
  std::string strategy = "both";
  std::string kernel = "sobolev";
  double delta = 0.0;
  double epsilon = 0.0;
  double shares = 5.0;
  double cost = 0.0001;
  std::uint64_t seed = 1;
  std::size_t lmax = 5000;
  std::size_t lshift = 2000;
  std::string out = "backtest_out";
  bool svg = false;
  unsigned threads = 0;
};

int do_run(const RunArgs& a, const CLI::App& cmd) {
  ExperimentConfig cfg;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw ConfigError("cannot open config " + a.config_path);
    try {
      nlohmann::json::parse(in).get_to(cfg);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--data")) cfg.data_path = a.data;
  if (given("--test")) {
    cfg.data_path.reset();
    apply_test_tokens(a.test, cfg.test);
  }
  if (given("--strategy")) cfg.strategy = parse_strategy(a.strategy);
  if (given("--kernel")) cfg.kernel = parse_kernel(a.kernel);
  if (given("--delta")) cfg.fixed_delta = a.delta;
  if (given("--epsilon")) {
    cfg.fixed_delta.reset();
    cfg.epsilon = a.epsilon;
  }
  if (given("--shares")) cfg.shares = a.shares;
  if (given("--cost")) cfg.cost_rate = a.cost;
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--lmax")) cfg.l_max = a.lmax;
  if (given("--lshift")) cfg.l_shift = a.lshift;
  if (given("--out")) cfg.out_dir = a.out;
  if (given("--svg")) cfg.svg = a.svg;
  if (given("--threads")) cfg.threads = a.threads;

  const ExperimentResult res = run_experiment(cfg);
  std::ifstream table(cfg.out_dir / "results.txt");
  std::cout << table.rdbuf();
  std::cout << "\nwindows " << res.windows << ", live steps " << res.live_steps << ", clamped "
            << res.clamp_count << ", ARMA fit failures " << res.arma_fit_failures << '\n';
  for (const auto& p : res.written) std::cout << "wrote " << p.string() << '\n';
  return 0;
}

struct CalibrateArgs {
  std::size_t n = 10000;
  double delta = 0.05;
  double confidence = 0.05;
  std::string outcomes = "adversarial";
  std::uint64_t seed = 1;
  std::string out = "calibration.csv";
};

// Interval rules on the forecast crossed with the halves of the information.
std::vector<CheckingRule> interval_rules(std::size_t bins) {
  std::vector<CheckingRule> rules;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = double(b) / double(bins);
    const double hi = double(b + 1) / double(bins);
    for (int h = 0; h < 2; ++h) {
      rules.push_back(CheckingRule::intervals({Interval{lo, hi, b + 1 == bins},
                                               Interval{0.5 * h, 0.5 * (h + 1), h == 1}}));
    }
  }
  return rules;
}

int do_calibrate(const CalibrateArgs& a) {
  const bool adversarial = a.outcomes == "adversarial";
  if (!adversarial && a.outcomes != "walk") throw ConfigError("--outcomes must be adversarial or walk");
  ForecasterConfig fc;
  fc.info_dim = 1;
  fc.schedule = FixedDelta{a.delta};
  fc.max_history = 0;
  RandomSource rng = RandomSource::derive(a.seed, 0);
  RandomSource world = RandomSource::derive(a.seed, 1);
  ForecastSession session(fc, rng);

  std::vector<CalibrationSample> transcript;
  transcript.reserve(a.n);
  double prev = 0.5;
  for (std::size_t i = 0; i < a.n; ++i) {
    const double x = prev;
    const std::span<const double> info(&x, 1);
    const double p = session.next_forecast(info, x);
    const RoundedDraw rd = session.randomize_round(p, info);
    double y;
    if (adversarial) {
      y = p < 0.5 ? 1.0 : 0.0;
    } else {
      y = std::clamp(prev + 0.02 * world.normal(), 0.0, 1.0);
    }
    transcript.push_back({rd.forecast, rd.info, y});
    session.update(p, info, x, y);
    prev = y;
  }

  const auto rules = interval_rules(10);
  CalibrationReport report = calibration_error(rules, transcript);
  const double bound = fixed_delta_bound(a.n, session.grid().delta(), 1, 0.0,
                                         a.confidence / static_cast<double>(rules.size()));
  std::size_t within = 0;
  for (auto& r : report.rules) {
    r.bound = bound;
    within += std::abs(r.cumulative) <= bound;
  }
  auto os = open_out(a.out);
  write_csv(os, report);
  std::cout << "rounds " << a.n << ", rules within bound " << within << "/" << report.rules.size()
            << ", bound " << bound << "\nwrote " << a.out << '\n';
  return within == report.rules.size() ? 0 : 3;
}

struct AdversaryArgs {
  std::size_t n = 50;
  std::size_t runs = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int do_adversary(const AdversaryArgs& a) {
  const auto rep = verify_outperformance(StrategySampler::uniform_sign(), a.n, a.runs, a.seed);
  std::printf("n %zu, runs %zu\nrule gain %.17g (1/2 - 2^-(n+1) = %.17g)\n", rep.n, rep.runs,
              rep.rule_gain, 0.5 - std::ldexp(1.0, -static_cast<int>(a.n + 1)));
  std::printf("mean strategy gain %.6g (sd %.6g, bound %.2f)\nstatistic %.6g\n",
              rep.mean_strategy_gain, rep.strategy_gain_stddev, rep.expected_gain_bound,
              rep.statistic);
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    write_csv(os, rep);
    std::cout << "wrote " << a.out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defensive forecasting backtests"};
  app.require_subcommand(1);

  RunArgs run;
  auto* cmd_run = app.add_subcommand("run", "Chain-method trading experiment");
  auto* opt_data = cmd_run->add_option("--data", run.data, "CSV with ticker,date,time,close");
  auto* opt_test = cmd_run->add_option("--test", run.test, "Simulated TEST stock: n=<N> sigma=<s> s0=<v>")
                       ->expected(1, 3);
  opt_data->excludes(opt_test);
  cmd_run->add_option("--config", run.config_path, "JSON experiment config; flags override it");
  cmd_run->add_option("--strategy", run.strategy, "rise|fall|both|defensive");
  cmd_run->add_option("--kernel", run.kernel, "sobolev|gaussian|cosine|expsmooth|discretized");
  auto* opt_delta = cmd_run->add_option("--delta", run.delta, "Fixed rounding resolution");
  auto* opt_eps = cmd_run->add_option("--epsilon", run.epsilon, "Doubling-trick epsilon");
  opt_delta->excludes(opt_eps);
  cmd_run->add_option("--shares", run.shares, "Shares K per trade");
  cmd_run->add_option("--cost", run.cost, "Transaction cost rate");
  cmd_run->add_option("--seed", run.seed, "Master seed");
  cmd_run->add_option("--lmax", run.lmax, "Window length");
  cmd_run->add_option("--lshift", run.lshift, "Warmup length and window overlap");
  cmd_run->add_option("--out", run.out, "Output directory");
  cmd_run->add_flag("--svg", run.svg, "Write SVG equity charts");
  cmd_run->add_option("--threads", run.threads, "Worker threads, 0 for all cores");

  CalibrateArgs cal;
  auto* cmd_cal = app.add_subcommand("calibrate", "Calibration suite over 20 interval rules");
  cmd_cal->add_option("--n", cal.n, "Rounds");
  cmd_cal->add_option("--delta", cal.delta, "Fixed rounding resolution");
  cmd_cal->add_option("--confidence", cal.confidence, "Total failure probability");
  cmd_cal->add_option("--outcomes", cal.outcomes, "adversarial|walk");
  cmd_cal->add_option("--seed", cal.seed, "Seed");
  cmd_cal->add_option("--out", cal.out, "Output CSV");

  AdversaryArgs adv;
  auto* cmd_adv = app.add_subcommand("adversary", "Prices that beat any i.i.d. strategy");
  cmd_adv->add_option("--n", adv.n, "Rounds")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  cmd_adv->add_option("--runs", adv.runs, "Monte Carlo runs");
  cmd_adv->add_option("--seed", adv.seed, "Seed");
  cmd_adv->add_option("--out", adv.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*cmd_run) return do_run(run, *cmd_run);
    if (*cmd_cal) return do_calibrate(cal);
    if (*cmd_adv) return do_adversary(adv);
  } catch (const std::exception& e) {
    std::cerr << "backtest: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
