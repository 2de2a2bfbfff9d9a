#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "defcast/forecaster.hpp"
#include "defcast/trading.hpp"

namespace defcast {

struct ChainWindow {
  std::size_t index;
  std::size_t start;  // first price index of the window
  std::size_t end;    // one past the last price index
  std::uint64_t seed;
};

/// Windows of length L_max every L_max - L_shift prices; the last one is cut
/// at the series end. Window w trades on the price indices
/// [start + L_shift, end), so the live regions partition [L_shift, length).
struct ChainPlan {
  std::size_t l_max = 5000;
  std::size_t l_shift = 2000;
  std::vector<ChainWindow> windows;

  std::size_t live_begin(const ChainWindow& w) const { return w.start + l_shift; }
};

/// Throws ConfigError unless 0 < L_shift < L_max and length >= L_shift + 2.
ChainPlan plan_chain(std::size_t length, std::size_t l_max, std::size_t l_shift,
                     std::uint64_t master_seed);

struct ChainConfig {
  /// Session settings shared by all windows; max_history is raised to fit a
  /// window.
  ForecasterConfig forecaster;
  double scale_c = 14.0;
  bool with_arma = true;
  int arma_p = 2;
  int arma_q = 1;
};

/// One live step: the trade from price index t-1 to t.
struct TranscriptRow {
  std::size_t t;
  std::size_t window;
  double raw_prev;
  double raw;
  double scaled_prev;  // S_{t-1}
  double scaled;       // S_t
  double forecast;     // p
  double rounded_forecast;
  double rounded_price;
  double arma_forecast;  // NaN without the ARMA lane
  double arma_rounded_forecast;
  double arma_rounded_price;
};

struct WindowResult {
  std::vector<TranscriptRow> rows;
  double scale = 0.0;
  std::size_t clamp_count = 0;
  std::size_t arma_fit_failures = 0;
};

/// Runs one window with a fresh session seeded from the window seed. Warmup
/// steps only feed the forecaster; the ARMA model is refit every L_shift
/// steps from the window's scaled prices.
WindowResult run_window(std::span<const double> raw, const ChainPlan& plan,
                        const ChainWindow& window, const ChainConfig& config);

enum class Execution { Sequential, Concurrent };

struct ChainResult {
  std::vector<TranscriptRow> rows;  // concatenated in window order
  std::size_t clamp_count = 0;
  std::size_t arma_fit_failures = 0;
};

/// The merged result does not depend on the execution mode.
ChainResult run_chain(std::span<const double> raw, const ChainPlan& plan,
                      const ChainConfig& config, Execution mode = Execution::Concurrent,
                      unsigned max_threads = 0);

/// Header plus one row per live step, doubles at 17 significant digits.
void write_transcript(std::ostream& os, std::span<const TranscriptRow> rows);

/// Forecasting steps for the UN or ARMA lane, ready for apply_strategy.
std::vector<TradeStep> un_steps(std::span<const TranscriptRow> rows);
std::vector<TradeStep> arma_steps(std::span<const TranscriptRow> rows);

/// Ŝ_{t0-1}, Ŝ_{t0}, ..., Ŝ_{t_last}: the raw prices the merged steps trade on.
std::vector<double> raw_ledger_prices(std::span<const TranscriptRow> rows);

}  // namespace defcast
