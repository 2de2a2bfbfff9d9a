#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "defcast/chain.hpp"
#include "defcast/trading.hpp"

namespace defcast {

enum class StrategyChoice { Rise, Fall, Both, Defensive };
enum class KernelChoice { Sobolev, Gaussian, Cosine, ExpSmooth, Discretized };

struct TestStockParams {
  std::size_t n = 20000;
  double sigma = 1.4;
  double s0 = 100.0;
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> data_path;  // TEST stock when unset
  TestStockParams test;
  StrategyChoice strategy = StrategyChoice::Both;
  KernelChoice kernel = KernelChoice::Sobolev;
  double gaussian_sigma = 0.1;
  double exp_c = 1.0;
  double exp_c2 = 1.0;
  std::optional<double> fixed_delta = 0.01;  // doubling trick when unset
  double epsilon = 0.25;
  double shares = 5.0;
  double cost_rate = 0.0001;
  std::uint64_t seed = 1;
  std::size_t l_max = 5000;
  std::size_t l_shift = 2000;
  double scale_c = 14.0;
  int arma_p = 2;
  int arma_q = 1;
  std::filesystem::path out_dir = "backtest_out";
  bool svg = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Throws ConfigError for values outside their domains.
void validate(const ExperimentConfig& config);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

std::string to_string(StrategyChoice s);
std::string to_string(KernelChoice k);
StrategyChoice parse_strategy(const std::string& s);
KernelChoice parse_kernel(const std::string& s);

/// Forecaster settings for a kernel choice; information is the previous
/// scaled price (k = 1).
ForecasterConfig make_forecaster_config(const ExperimentConfig& config);

/// Universal trading table row.
struct ProfitRow {
  std::string ticker;
  double buy_hold = 0.0;
  double un_rise = 0.0;
  double un_fall = 0.0;
  double arma_rise = 0.0;
  double arma_fall = 0.0;
};

/// Defensive trading table row.
struct DefensiveRow {
  std::string ticker;
  double buy_hold = 0.0;
  double un_profit = 0.0;
  double un_profit_cost = 0.0;
  double arma_profit = 0.0;
  double arma_profit_cost = 0.0;
  double un_in = 0.0;
  double arma_in = 0.0;
  double un_duration = 0.0;
  double arma_duration = 0.0;
};

extern const std::vector<std::string> kProfitColumns;
extern const std::vector<std::string> kDefensiveColumns;

void write_profit_table(std::ostream& os, std::span<const ProfitRow> rows);
void write_defensive_table(std::ostream& os, std::span<const DefensiveRow> rows);
/// Space-aligned text rendering of a CSV-style table.
void write_aligned(std::ostream& os, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& cells);

/// Fraction of steps with p̃ > S̃.
double entry_frequency(std::span<const TradeStep> steps);
/// Mean length of maximal runs of consecutive entry steps; 0 without entries.
double mean_entry_duration(std::span<const TradeStep> steps);

/// Polyline chart of several equity curves sharing the step axis.
void write_svg(std::ostream& os, const std::string& title,
               const std::vector<std::pair<std::string, const EquityCurve*>>& curves);

struct ExperimentResult {
  ProfitRow profits;
  std::optional<DefensiveRow> defensive;
  std::vector<std::pair<std::string, EquityCurve>> curves;  // label, curve
  std::size_t live_steps = 0;
  std::size_t windows = 0;
  std::size_t clamp_count = 0;
  std::size_t arma_fit_failures = 0;
  std::vector<std::filesystem::path> written;
};

/// Loads or simulates the series, runs the chain, applies the strategies and
/// writes results.csv, results.txt, transcript.csv, config.json, one
/// equity_<ticker>_<label>.csv per curve, defensive.csv for the defensive
/// strategy and SVG charts when requested.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace defcast
