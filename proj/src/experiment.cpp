#include "defcast/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "defcast/errors.hpp"
#include "defcast/price_series.hpp"

namespace defcast {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

void write_rows(std::ostream& os, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& cells) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

std::vector<std::vector<std::string>> profit_cells(std::span<const ProfitRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.ticker, fmt(r.buy_hold), fmt(r.un_rise), fmt(r.un_fall), fmt(r.arma_rise),
                     fmt(r.arma_fall)});
  }
  return cells;
}

std::vector<std::vector<std::string>> defensive_cells(std::span<const DefensiveRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.ticker, fmt(r.buy_hold), fmt(r.un_profit), fmt(r.un_profit_cost),
                     fmt(r.arma_profit), fmt(r.arma_profit_cost), fmt(r.un_in), fmt(r.arma_in),
                     fmt(r.un_duration), fmt(r.arma_duration)});
  }
  return cells;
}

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

const std::vector<std::string> kProfitColumns = {
    "Ticker", "Buy&Hold Profit %", "UN for a rise Profit %", "UN for a fall Profit %",
    "ARMA for a rise Profit %", "ARMA for a fall Profit %"};

const std::vector<std::string> kDefensiveColumns = {
    "Ticker",  "Buy&Hold Profit %", "UN Profit %", "UN Profit -0.01% %", "ARMA Profit %",
    "ARMA Profit -0.01% %", "UN In", "ARMA In", "UN D", "ARMA D"};

std::string to_string(StrategyChoice s) {
  switch (s) {
    case StrategyChoice::Rise: return "rise";
    case StrategyChoice::Fall: return "fall";
    case StrategyChoice::Both: return "both";
    case StrategyChoice::Defensive: return "defensive";
  }
  return "?";
}

std::string to_string(KernelChoice k) {
  switch (k) {
    case KernelChoice::Sobolev: return "sobolev";
    case KernelChoice::Gaussian: return "gaussian";
    case KernelChoice::Cosine: return "cosine";
    case KernelChoice::ExpSmooth: return "expsmooth";
    case KernelChoice::Discretized: return "discretized";
  }
  return "?";
}

StrategyChoice parse_strategy(const std::string& s) {
  return parse_enum<StrategyChoice>(s,
                                    {{"rise", StrategyChoice::Rise},
                                     {"fall", StrategyChoice::Fall},
                                     {"both", StrategyChoice::Both},
                                     {"defensive", StrategyChoice::Defensive}},
                                    "strategy");
}

KernelChoice parse_kernel(const std::string& s) {
  return parse_enum<KernelChoice>(s,
                                  {{"sobolev", KernelChoice::Sobolev},
                                   {"gaussian", KernelChoice::Gaussian},
                                   {"cosine", KernelChoice::Cosine},
                                   {"expsmooth", KernelChoice::ExpSmooth},
                                   {"discretized", KernelChoice::Discretized}},
                                  "kernel");
}

void validate(const ExperimentConfig& c) {
  if (!c.data_path) {
    if (c.test.n < 2) throw ConfigError("test stock needs n >= 2");
    if (!(c.test.sigma >= 0.0)) throw ConfigError("test stock sigma must be non-negative");
    if (!(c.test.s0 > 0.0)) throw ConfigError("test stock s0 must be positive");
  }
  if (c.fixed_delta && !(*c.fixed_delta > 0.0 && *c.fixed_delta <= 0.5)) {
    throw ConfigError("delta must lie in (0, 1/2]");
  }
  if (!c.fixed_delta && !(c.epsilon > 0.0 && c.epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1)");
  }
  if (!(c.shares > 0.0)) throw ConfigError("shares must be positive");
  if (!(c.cost_rate >= 0.0)) throw ConfigError("cost rate must be non-negative");
  if (c.l_shift == 0 || c.l_shift >= c.l_max) throw ConfigError("need 0 < lshift < lmax");
  if (!(c.scale_c > 0.0)) throw ConfigError("scaling constant must be positive");
  if (!(c.gaussian_sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
  if (c.arma_p < 0 || c.arma_q < 0 || c.arma_p + c.arma_q < 1) throw ConfigError("bad ARMA order");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{
      {"test", {{"n", c.test.n}, {"sigma", c.test.sigma}, {"s0", c.test.s0}}},
      {"strategy", to_string(c.strategy)},
      {"kernel", to_string(c.kernel)},
      {"gaussian_sigma", c.gaussian_sigma},
      {"exp_c", c.exp_c},
      {"exp_c2", c.exp_c2},
      {"epsilon", c.epsilon},
      {"shares", c.shares},
      {"cost", c.cost_rate},
      {"seed", c.seed},
      {"lmax", c.l_max},
      {"lshift", c.l_shift},
      {"scale_c", c.scale_c},
      {"arma_p", c.arma_p},
      {"arma_q", c.arma_q},
      {"out", c.out_dir.string()},
      {"svg", c.svg},
      {"threads", c.threads},
  };
  j["data"] = c.data_path ? nlohmann::json(c.data_path->string()) : nlohmann::json(nullptr);
  j["delta"] = c.fixed_delta ? nlohmann::json(*c.fixed_delta) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  try {
    if (j.contains("data")) {
      if (j["data"].is_null()) c.data_path.reset();
      else c.data_path = j["data"].get<std::string>();
    }
    if (j.contains("test")) {
      const auto& t = j["test"];
      c.test.n = t.value("n", c.test.n);
      c.test.sigma = t.value("sigma", c.test.sigma);
      c.test.s0 = t.value("s0", c.test.s0);
    }
    if (j.contains("strategy")) c.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"].get<std::string>());
    c.gaussian_sigma = j.value("gaussian_sigma", c.gaussian_sigma);
    c.exp_c = j.value("exp_c", c.exp_c);
    c.exp_c2 = j.value("exp_c2", c.exp_c2);
    if (j.contains("delta")) {
      if (j["delta"].is_null()) c.fixed_delta.reset();
      else c.fixed_delta = j["delta"].get<double>();
    }
    c.epsilon = j.value("epsilon", c.epsilon);
    c.shares = j.value("shares", c.shares);
    c.cost_rate = j.value("cost", c.cost_rate);
    c.seed = j.value("seed", c.seed);
    c.l_max = j.value("lmax", c.l_max);
    c.l_shift = j.value("lshift", c.l_shift);
    c.scale_c = j.value("scale_c", c.scale_c);
    c.arma_p = j.value("arma_p", c.arma_p);
    c.arma_q = j.value("arma_q", c.arma_q);
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    c.svg = j.value("svg", c.svg);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ForecasterConfig make_forecaster_config(const ExperimentConfig& c) {
  ForecasterConfig fc;
  fc.info_dim = 1;
  fc.max_history = 0;
  if (c.fixed_delta) fc.schedule = FixedDelta{*c.fixed_delta};
  else fc.schedule = DoublingTrick{c.epsilon};
  switch (c.kernel) {
    case KernelChoice::Sobolev:
      fc.side_kernel = KernelSpec::sobolev(1);
      break;
    case KernelChoice::Discretized:
      break;
    case KernelChoice::Gaussian:
      fc.smooth_kernel = KernelSpec::gaussian(c.gaussian_sigma, 2);
      break;
    case KernelChoice::Cosine:
      fc.smooth_kernel = KernelSpec::cosine_half_pi(2);
      break;
    case KernelChoice::ExpSmooth:
      fc.smooth_kernel = KernelSpec::exp_smooth(c.exp_c, c.exp_c2, 2);
      break;
  }
  return fc;
}

void write_profit_table(std::ostream& os, std::span<const ProfitRow> rows) {
  write_rows(os, kProfitColumns, profit_cells(rows));
}

void write_defensive_table(std::ostream& os, std::span<const DefensiveRow> rows) {
  write_rows(os, kDefensiveColumns, defensive_cells(rows));
}

void write_aligned(std::ostream& os, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << (i ? std::right : std::left)
         << row[i];
    }
    os << '\n';
  };
  line(header);
  for (const auto& row : cells) line(row);
}

double entry_frequency(std::span<const TradeStep> steps) {
  if (steps.empty()) return 0.0;
  std::size_t in = 0;
  for (const auto& s : steps) in += m1_decision(s.rounded_forecast, s.rounded_price);
  return static_cast<double>(in) / static_cast<double>(steps.size());
}

double mean_entry_duration(std::span<const TradeStep> steps) {
  std::size_t runs = 0;
  std::size_t total = 0;
  bool inside = false;
  for (const auto& s : steps) {
    const bool entry = m1_decision(s.rounded_forecast, s.rounded_price) == 1;
    if (entry) {
      ++total;
      if (!inside) ++runs;
    }
    inside = entry;
  }
  return runs == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(runs);
}

void write_svg(std::ostream& os, const std::string& title,
               const std::vector<std::pair<std::string, const EquityCurve*>>& curves) {
  static const char* kColors[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  constexpr double kW = 800, kH = 450, kPad = 50;
  double lo = INFINITY, hi = -INFINITY;
  std::size_t steps = 1;
  for (const auto& [_, c] : curves) {
    lo = std::min(lo, c->initial_capital);
    hi = std::max(hi, c->initial_capital);
    for (const auto& p : c->points) {
      lo = std::min(lo, p.capital);
      hi = std::max(hi, p.capital);
    }
    steps = std::max(steps, c->points.size());
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto x = [&](std::size_t i) { return kPad + (kW - 2 * kPad) * double(i) / double(steps); };
  auto y = [&](double v) { return kH - kPad - (kH - 2 * kPad) * (v - lo) / (hi - lo); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kPad << "\" y=\"20\">" << title << "</text>\n";
  os << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad << "\" y2=\""
     << kH - kPad << "\" stroke=\"#888\"/>\n";
  os << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\"" << kH - kPad
     << "\" stroke=\"#888\"/>\n";
  os << "<text x=\"4\" y=\"" << kPad << "\">" << fmt(hi) << "</text>\n";
  os << "<text x=\"4\" y=\"" << kH - kPad << "\">" << fmt(lo) << "</text>\n";
  os << std::setprecision(6);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& [label, c] = curves[k];
    const char* color = kColors[k % std::size(kColors)];
    // Thin the polyline to at most ~2000 vertices.
    const std::size_t stride = std::max<std::size_t>(1, c->points.size() / 2000);
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << x(0) << ','
       << y(c->initial_capital);
    for (std::size_t i = 0; i < c->points.size(); i += stride) {
      os << ' ' << x(i + 1) << ',' << y(c->points[i].capital);
    }
    if (!c->points.empty()) os << ' ' << x(c->points.size()) << ',' << y(c->points.back().capital);
    os << "\"/>\n";
    os << "<text x=\"" << kW - kPad - 160 << "\" y=\"" << kPad + 16 * double(k) << "\" fill=\"" << color
       << "\">" << label << "</text>\n";
  }
  os << "</svg>\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  PriceSeries series;
  if (config.data_path) {
    series = ingest_csv(*config.data_path);
  } else {
    RandomSource rng = RandomSource::derive(config.seed, 0xD47A);
    series = simulate_test_stock(config.test.n, config.test.sigma, config.test.s0, rng);
  }

  const ChainPlan plan = plan_chain(series.size(), config.l_max, config.l_shift, config.seed);
  ChainConfig cc;
  cc.forecaster = make_forecaster_config(config);
  cc.scale_c = config.scale_c;
  cc.arma_p = config.arma_p;
  cc.arma_q = config.arma_q;
  const ChainResult chain = run_chain(series.raw, plan, cc, Execution::Concurrent, config.threads);

  const auto un = un_steps(chain.rows);
  const auto arma = arma_steps(chain.rows);
  const auto prices = raw_ledger_prices(chain.rows);
  const double k0 = config.shares * prices.front();

  ExperimentResult res;
  res.live_steps = chain.rows.size();
  res.windows = plan.windows.size();
  res.clamp_count = chain.clamp_count;
  res.arma_fit_failures = chain.arma_fit_failures;

  auto curve = [&](const char* label, const StrategyKind& kind, std::span<const TradeStep> steps) {
    res.curves.emplace_back(label, apply_strategy(prices, kind, steps, config.shares, k0));
    return res.curves.back().second.profit_percent();
  };
  const bool rise = config.strategy != StrategyChoice::Fall;
  const bool fall = config.strategy != StrategyChoice::Rise;

  res.profits.ticker = series.ticker;
  res.profits.buy_hold = curve("buyhold", strategy::BuyHold{}, un);
  res.profits.un_rise = curve("un_rise", strategy::RiseOnly{}, un);
  res.profits.un_fall = curve("un_fall", strategy::FallOnly{}, un);
  res.profits.arma_rise = curve("arma_rise", strategy::RiseOnly{}, arma);
  res.profits.arma_fall = curve("arma_fall", strategy::FallOnly{}, arma);

  if (config.strategy == StrategyChoice::Defensive) {
    DefensiveRow d;
    d.ticker = series.ticker;
    d.buy_hold = res.profits.buy_hold;
    d.un_profit = curve("un_defensive", strategy::DefensiveCapital{0.0}, un);
    d.un_profit_cost = curve("un_defensive_cost", strategy::DefensiveCapital{config.cost_rate}, un);
    d.arma_profit = curve("arma_defensive", strategy::DefensiveCapital{0.0}, arma);
    d.arma_profit_cost = curve("arma_defensive_cost", strategy::DefensiveCapital{config.cost_rate}, arma);
    d.un_in = entry_frequency(un);
    d.arma_in = entry_frequency(arma);
    d.un_duration = mean_entry_duration(un);
    d.arma_duration = mean_entry_duration(arma);
    res.defensive = d;
  }

  std::filesystem::create_directories(config.out_dir);
  auto emit = [&](const std::string& name, auto&& body) {
    const auto path = config.out_dir / name;
    auto os = open_out(path);
    body(os);
    if (!os) throw DataError("write failed: " + path.string());
    res.written.push_back(path);
  };

  emit("results.csv", [&](std::ostream& os) { write_profit_table(os, std::span(&res.profits, 1)); });
  emit("results.txt", [&](std::ostream& os) {
    write_aligned(os, kProfitColumns, profit_cells(std::span(&res.profits, 1)));
    if (res.defensive) {
      os << '\n';
      write_aligned(os, kDefensiveColumns, defensive_cells(std::span(&*res.defensive, 1)));
    }
  });
  if (res.defensive) {
    emit("defensive.csv",
         [&](std::ostream& os) { write_defensive_table(os, std::span(&*res.defensive, 1)); });
  }
  emit("transcript.csv", [&](std::ostream& os) { write_transcript(os, chain.rows); });
  emit("config.json", [&](std::ostream& os) { os << nlohmann::json(config).dump(2) << '\n'; });

  auto wanted = [&](const std::string& label) {
    if (label == "buyhold") return true;
    if (config.strategy == StrategyChoice::Defensive) return label.find("defensive") != std::string::npos;
    if (label.find("defensive") != std::string::npos) return false;
    return (rise && label.ends_with("rise")) || (fall && label.ends_with("fall"));
  };
  std::vector<std::pair<std::string, const EquityCurve*>> plotted;
  for (const auto& [label, c] : res.curves) {
    if (!wanted(label)) continue;
    emit("equity_" + series.ticker + "_" + label + ".csv", [&](std::ostream& os) { write_csv(os, c); });
    plotted.emplace_back(label, &c);
  }
  if (config.svg) {
    emit("equity_" + series.ticker + "_" + to_string(config.strategy) + ".svg",
         [&](std::ostream& os) { write_svg(os, series.ticker + " capital", plotted); });
  }
  return res;
}

}  // namespace defcast
