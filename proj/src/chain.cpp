#include "defcast/chain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "defcast/arma.hpp"
#include "defcast/errors.hpp"
#include "defcast/price_series.hpp"
#include "defcast/rounding_grid.hpp"

namespace defcast {
namespace {

constexpr std::uint64_t kForecastLane = 0;
constexpr std::uint64_t kArmaLane = 1;

}  // namespace

ChainPlan plan_chain(std::size_t length, std::size_t l_max, std::size_t l_shift,
                     std::uint64_t master_seed) {
  if (l_shift == 0 || l_shift >= l_max) throw ConfigError("chain: need 0 < L_shift < L_max");
  if (length < l_shift + 2) throw ConfigError("chain: series shorter than L_shift + 2");
  ChainPlan plan;
  plan.l_max = l_max;
  plan.l_shift = l_shift;
  const std::size_t stride = l_max - l_shift;
  for (std::size_t start = 0; start + l_shift < length; start += stride) {
    const std::size_t index = plan.windows.size();
    plan.windows.push_back({index, start, std::min(start + l_max, length),
                            RandomSource::derive(master_seed, index).next_u64()});
    if (start + l_max >= length) break;
  }
  return plan;
}

WindowResult run_window(std::span<const double> raw, const ChainPlan& plan,
                        const ChainWindow& window, const ChainConfig& config) {
  if (window.end > raw.size() || window.start + plan.l_shift >= window.end) {
    throw ConfigError("chain: window outside the series");
  }
  const auto slice = raw.subspan(window.start, window.end - window.start);
  const ScaledWindow sw = scale_window(slice, plan.l_shift, config.scale_c);
  const std::vector<double>& s = sw.scaled;

  ForecasterConfig fc = config.forecaster;
  fc.info_dim = 1;
  if (fc.max_history != 0) fc.max_history = std::max(fc.max_history, slice.size());
  ForecastSession session(fc, RandomSource::derive(window.seed, kForecastLane));
  RandomSource arma_rng = RandomSource::derive(window.seed, kArmaLane);

  WindowResult out;
  out.scale = sw.scale;
  out.clamp_count = sw.clamp_count;
  out.rows.reserve(slice.size() - plan.l_shift);

  ArmaModel model;
  std::size_t last_fit = 0;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t i = 1; i < s.size(); ++i) {
    const double x = s[i - 1];
    const std::span<const double> info(&x, 1);
    const double p = session.next_forecast(info, x);
    const bool live = i >= plan.l_shift;
    if (live) {
      TranscriptRow row{window.start + i, window.index, slice[i - 1], slice[i], s[i - 1], s[i], p,
                        kNaN, kNaN, kNaN, kNaN, kNaN};
      const RoundedDraw rd = session.randomize_round(p, info);
      row.rounded_forecast = rd.forecast;
      row.rounded_price = rd.info[0];
      if (config.with_arma) {
        if (!model.fitted || i - last_fit >= plan.l_shift) {
          try {
            model = fit_arma(std::span<const double>(s.data(), i), config.arma_p, config.arma_q);
          } catch (const FitError&) {
            model = ArmaModel{};
            ++out.arma_fit_failures;
          }
          last_fit = i;
        }
        double pa = x;
        if (model.fitted) {
          try {
            pa = forecast_next(model, std::span<const double>(s.data(), i));
          } catch (const NumericalError&) {
            pa = x;
          }
        }
        const double pair[2] = {pa, x};
        const GridTuple g = sample(product_weights(session.grid(), pair), arma_rng);
        const auto v = grid_values(session.grid(), g);
        row.arma_forecast = pa;
        row.arma_rounded_forecast = v[0];
        row.arma_rounded_price = v[1];
      }
      out.rows.push_back(row);
    }
    session.update(p, info, x, s[i]);
  }
  return out;
}

ChainResult run_chain(std::span<const double> raw, const ChainPlan& plan,
                      const ChainConfig& config, Execution mode, unsigned max_threads) {
  std::vector<WindowResult> results(plan.windows.size());
  if (mode == Execution::Sequential || plan.windows.size() <= 1) {
    for (const auto& w : plan.windows) results[w.index] = run_window(raw, plan, w, config);
  } else {
    unsigned threads = max_threads ? max_threads : std::max(2u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(plan.windows.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(plan.windows.size());
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < plan.windows.size(); j = next++) {
          try {
            results[j] = run_window(raw, plan, plan.windows[j], config);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ChainResult merged;
  for (auto& r : results) {
    merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
    merged.clamp_count += r.clamp_count;
    merged.arma_fit_failures += r.arma_fit_failures;
  }
  return merged;
}

void write_transcript(std::ostream& os, std::span<const TranscriptRow> rows) {
  os << "t,window,raw_prev,raw,scaled_prev,scaled,forecast,rounded_forecast,rounded_price,"
        "arma_forecast,arma_rounded_forecast,arma_rounded_price\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.t, r.window, r.raw_prev, r.raw, r.scaled_prev, r.scaled, r.forecast,
                  r.rounded_forecast, r.rounded_price, r.arma_forecast, r.arma_rounded_forecast,
                  r.arma_rounded_price);
    os << buf;
  }
}

std::vector<TradeStep> un_steps(std::span<const TranscriptRow> rows) {
  std::vector<TradeStep> steps;
  steps.reserve(rows.size());
  for (const auto& r : rows) {
    steps.push_back({r.forecast, r.rounded_forecast, r.rounded_price, {r.rounded_price}, r.scaled_prev});
  }
  return steps;
}

std::vector<TradeStep> arma_steps(std::span<const TranscriptRow> rows) {
  std::vector<TradeStep> steps;
  steps.reserve(rows.size());
  for (const auto& r : rows) {
    if (std::isnan(r.arma_forecast)) throw ConfigError("chain: transcript has no ARMA lane");
    steps.push_back({r.arma_forecast, r.arma_rounded_forecast, r.arma_rounded_price,
                     {r.arma_rounded_price}, r.scaled_prev});
  }
  return steps;
}

std::vector<double> raw_ledger_prices(std::span<const TranscriptRow> rows) {
  std::vector<double> prices;
  if (rows.empty()) return prices;
  prices.reserve(rows.size() + 1);
  prices.push_back(rows.front().raw_prev);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j > 0 && rows[j].t != rows[j - 1].t + 1) throw DataError("chain: transcript has a gap");
    prices.push_back(rows[j].raw);
  }
  return prices;
}

}  // namespace defcast
