#include "defcast/price_series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "defcast/errors.hpp"

namespace defcast {
namespace {

constexpr double kReflectFloor = 1e-6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool all_digits(std::string_view s, std::size_t len) {
  return s.size() == len && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

std::int64_t parse_timestamp(std::string_view date, std::string_view time, std::size_t line) {
  if (!all_digits(date, 8)) throw ParseError(line, "date must be YYYYMMDD");
  if (!all_digits(time, 4)) throw ParseError(line, "time must be HHMM");
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0;
  std::from_chars(date.data(), date.data() + 4, y);
  std::from_chars(date.data() + 4, date.data() + 6, mo);
  std::from_chars(date.data() + 6, date.data() + 8, d);
  std::from_chars(time.data(), time.data() + 2, hh);
  std::from_chars(time.data() + 2, time.data() + 4, mm);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) throw ParseError(line, "invalid calendar date");
  if (hh > 23 || mm > 59) throw ParseError(line, "invalid time of day");
  return ((std::int64_t{y} * 100 + mo) * 100 + d) * 10000 + hh * 100 + mm;
}

double parse_close(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, "close is not a number");
  }
  return v;
}

std::int64_t minute_stamp(std::chrono::sys_time<std::chrono::minutes> t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const auto minutes = (t - day).count();
  return ((std::int64_t{int(ymd.year())} * 100 + unsigned(ymd.month())) * 100 + unsigned(ymd.day())) *
             10000 +
         (minutes / 60) * 100 + minutes % 60;
}

}  // namespace

PriceSeries ingest_csv(std::istream& in) {
  PriceSeries series;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++lineno;
  {
    const auto cols = split(line);
    if (cols.size() != 4 || cols[0] != "ticker" || cols[1] != "date" || cols[2] != "time" ||
        cols[3] != "close") {
      throw ParseError(lineno, "header must be ticker,date,time,close");
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(line);
    if (cols.size() != 4) throw ParseError(lineno, "expected 4 fields");
    if (cols[0].empty()) throw ParseError(lineno, "empty ticker");
    const std::int64_t ts = parse_timestamp(cols[1], cols[2], lineno);
    const double close = parse_close(cols[3], lineno);
    if (series.raw.empty()) {
      series.ticker = std::string(cols[0]);
    } else if (cols[0] != series.ticker) {
      throw DataError("line " + std::to_string(lineno) + ": ticker changes from " + series.ticker);
    }
    if (!(close > 0.0)) throw DataError("line " + std::to_string(lineno) + ": close must be positive");
    if (!series.timestamps.empty() && ts <= series.timestamps.back()) {
      throw DataError("line " + std::to_string(lineno) + ": timestamps not strictly increasing");
    }
    series.timestamps.push_back(ts);
    series.raw.push_back(close);
  }
  return series;
}

PriceSeries ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ingest_csv(in);
}

void write_csv(std::ostream& os, const PriceSeries& series) {
  os << std::setprecision(17) << "ticker,date,time,close\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::int64_t ts = series.timestamps[i];
    os << series.ticker << ',' << ts / 10000 << ',' << std::setw(4) << std::setfill('0') << ts % 10000
       << std::setfill(' ') << ',' << series.raw[i] << '\n';
  }
}

ScaledWindow scale_window(std::span<const double> raw, std::size_t l_shift, double c) {
  if (l_shift == 0 || l_shift > raw.size()) throw ConfigError("scale_window: need 0 < L_shift <= window length");
  if (!(c > 0.0)) throw ConfigError("scale_window: c must be positive");
  const double peak = *std::max_element(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(l_shift));
  if (!(peak > 0.0)) throw DataError("scale_window: warmup prices must be positive");
  ScaledWindow w;
  w.scale = c * peak;
  w.scaled.reserve(raw.size());
  for (double v : raw) {
    double s = v / w.scale;
    if (s > 1.0) {
      s = 1.0;
      ++w.clamp_count;
    } else if (s < 0.0) {
      s = 0.0;
      ++w.clamp_count;
    }
    w.scaled.push_back(s);
  }
  return w;
}

PriceSeries simulate_test_stock(std::size_t n, double sigma, double s0, RandomSource& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("test stock: sigma must be non-negative");
  if (!(s0 > 0.0)) throw ConfigError("test stock: s0 must be positive");
  PriceSeries series;
  series.ticker = "TEST";
  series.raw.reserve(n);
  series.timestamps.reserve(n);
  using namespace std::chrono;
  const sys_time<minutes> origin = sys_days{year{2020} / January / 6} + hours{10};
  double s = s0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      s += sigma * rng.normal();
      if (s < kReflectFloor) s = 2.0 * kReflectFloor - s;
      if (s < kReflectFloor) s = kReflectFloor;
    }
    series.raw.push_back(s);
    series.timestamps.push_back(minute_stamp(origin + minutes{static_cast<long>(i)}));
  }
  return series;
}

}  // namespace defcast
