#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "defcast/random.hpp"

namespace defcast {

/// Per-minute closes of one ticker. Timestamps are YYYYMMDDHHMM.
struct PriceSeries {
  std::string ticker;
  std::vector<std::int64_t> timestamps;
  std::vector<double> raw;

  std::size_t size() const noexcept { return raw.size(); }
};

/// Parses `ticker,date,time,close` rows (date YYYYMMDD, time HHMM).
/// Malformed rows throw ParseError with the 1-based line number; a
/// non-positive close, a non-increasing timestamp or a second ticker throws
/// DataError.
PriceSeries ingest_csv(std::istream& in);
PriceSeries ingest_csv(const std::filesystem::path& path);

void write_csv(std::ostream& os, const PriceSeries& series);

struct ScaledWindow {
  std::vector<double> scaled;
  double scale = 0.0;  // c · max of the first L_shift raw values
  std::size_t clamp_count = 0;
};

/// S_i = Ŝ_i / (c · max_{j < L_shift} Ŝ_j), clamped to 1 with a count.
ScaledWindow scale_window(std::span<const double> raw, std::size_t l_shift, double c);

/// TEST stock: Ŝ_i = Ŝ_{i-1} + ξ_i with ξ_i ~ N(0, σ²), reflected at a
/// floor of 1e-6. Returns n prices starting at s0, one per minute.
PriceSeries simulate_test_stock(std::size_t n, double sigma, double s0, RandomSource& rng);

}  // namespace defcast
