#include "defcast/forecaster.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace defcast {

namespace {

constexpr int kScanCells = 64;
constexpr double kZeroEverywhere = 1e-12;
constexpr double kRootTolerance = 1e-9;
constexpr double kBracketWidth = 1e-12;
constexpr std::size_t kDenseLimit = std::size_t{1} << 22;

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::domain_error(std::string("forecaster: ") + what + " " + std::to_string(v) +
                            " outside [0,1]");
  }
}

}  // namespace

double ScheduleState::next_boundary() const {
  if (!doubling()) return std::numeric_limits<double>::infinity();
  return stage_boundary(stage + 1, M);
}

double stage_boundary(int s, int M) { return std::pow(static_cast<double>(s + M), M); }

double optimal_delta(std::size_t k, double cF, double n) {
  const double kd = static_cast<double>(k);
  return std::pow((kd + 1.0) / 2.0, 2.0 / (kd + 3.0)) * std::pow(cF * cF + 1.0, 1.0 / (kd + 3.0)) *
         std::pow(n, -1.0 / (kd + 3.0));
}

double clamp_to_grid_delta(double raw) {
  if (!(raw > 0.0)) throw std::domain_error("schedule: resolution must be positive");
  double k = std::ceil(1.0 / raw - 1e-9);
  k = std::clamp(k, 2.0, static_cast<double>(RoundingGrid::kMaxIntervals));
  return 1.0 / k;
}

double schedule_delta(const ScheduleState& schedule, std::size_t k, double cF) {
  if (const auto* fixed = std::get_if<FixedDelta>(&schedule.mode)) return fixed->delta;
  return clamp_to_grid_delta(optimal_delta(k, cF, stage_boundary(schedule.stage, schedule.M)));
}

ScheduleState make_schedule(const ScheduleMode& mode, std::size_t k, double cF) {
  ScheduleState st;
  st.mode = mode;
  if (const auto* fixed = std::get_if<FixedDelta>(&mode)) {
    st.delta = RoundingGrid::from_delta(fixed->delta).delta();
    st.n_s = 1.0;
    return st;
  }
  const double eps = std::get<DoublingTrick>(mode).epsilon;
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("schedule: epsilon must lie in (0,1)");
  st.M = static_cast<int>(std::ceil(1.0 / eps - 1e-12));
  st.stage = 0;
  st.n_s = stage_boundary(0, st.M);
  st.delta = schedule_delta(st, k, cF);
  return st;
}

bool stage_transition_condition(int s, int M, std::size_t k, double cF) {
  const double n_s = stage_boundary(s, M);
  const double n_next = stage_boundary(s + 1, M);
  const double d_s = clamp_to_grid_delta(optimal_delta(k, cF, n_s));
  const double d_next = clamp_to_grid_delta(optimal_delta(k, cF, n_next));
  const double sd = static_cast<double>(s);
  return n_next >= (2.0 * sd * d_s + d_next) / (d_next * (2.0 * sd + 1.0)) * n_s;
}

// U_n restricted to one round: everything that does not depend on p is
// computed once so the root search only pays for the p-dependent part.
class ForecastSession::Evaluator {
 public:
  Evaluator(const ForecastSession& s, std::span<const double> info, double signal)
      : s_(s), info_(info.begin(), info.end()), side_(s.side_sum(signal)) {
    if (s_.route_ == Route::Discretized) {
      if (info_.empty()) {
        info_entries_.push_back({0, 1.0});
      } else {
        for (const auto& e : product_weights(s_.grid_, info_)) {
          info_entries_.push_back({s_.info_key(e.index), e.weight});
        }
      }
    }
  }

  double operator()(double p) const { return side_ + rounding_part(p); }

 private:
  double rounding_part(double p) const {
    switch (s_.route_) {
      case Route::Discretized: {
        double acc = 0.0;
        for (const auto& pe : weights(s_.grid_, p)) {
          const auto base = static_cast<std::uint64_t>(pe.index[0]) * s_.info_stride_;
          for (const auto& [key, w] : info_entries_) acc += pe.weight * w * s_.mu(base + key);
        }
        return acc;
      }
      case Route::Cosine: {
        const double a = std::numbers::pi * p / 2.0;
        return std::cos(a) * s_.cos_sum_ + std::sin(a) * s_.sin_sum_;
      }
      case Route::ExpSmooth: {
        const auto& e = std::get<kernel::ExpSmooth>(s_.config_.smooth_kernel->variant());
        double arg = e.c * p;
        if (s_.config_.smooth_kernel->dimension() == 2) arg += e.c2 * info_[0];
        return std::exp(arg) * s_.exp_sum_;
      }
      case Route::Direct:
        break;
    }
    const KernelSpec& k = *s_.config_.smooth_kernel;
    Point x{p};
    x.insert(x.end(), info_.begin(), info_.end());
    x.resize(k.dimension());
    double acc = 0.0;
    Point xi;
    for (const auto& r : s_.history_) {
      xi.assign(1, r.forecast);
      xi.insert(xi.end(), r.info.begin(), r.info.end());
      xi.resize(k.dimension());
      acc += eval(k, x, xi) * (r.outcome - r.forecast);
    }
    return acc;
  }

  const ForecastSession& s_;
  Point info_;
  double side_;
  std::vector<std::pair<std::uint64_t, double>> info_entries_;
};

ForecastSession::ForecastSession(ForecasterConfig config, RandomSource rng)
    : config_(std::move(config)),
      rng_(rng),
      schedule_(make_schedule(config_.schedule, config_.info_dim,
                              embedding_constant(config_.side_kernel))),
      grid_(RoundingGrid::from_delta(schedule_.delta)),
      side_cf_(embedding_constant(config_.side_kernel)),
      route_(Route::Discretized) {
  if (config_.side_kernel.dimension() != 1) {
    throw std::domain_error("forecaster: side kernel must act on scalar signals");
  }
  if (config_.smooth_kernel) {
    const auto& k = *config_.smooth_kernel;
    if (k.dimension() > config_.info_dim + 1) {
      throw std::domain_error("forecaster: smooth kernel dimension exceeds k+1");
    }
    if (std::holds_alternative<kernel::CosineHalfPi>(k.variant()) && k.dimension() == 1) {
      route_ = Route::Cosine;
    } else if (std::holds_alternative<kernel::ExpSmooth>(k.variant())) {
      route_ = Route::ExpSmooth;
    } else {
      route_ = Route::Direct;
    }
  }
  rebuild_accumulator();
}

KernelSpec ForecastSession::rounding_part() const {
  if (config_.smooth_kernel) return *config_.smooth_kernel;
  return KernelSpec::discretized(grid_, config_.info_dim + 1);
}

void ForecastSession::validate(double p, std::span<const double> info, double signal) const {
  check_unit(p, "forecast");
  check_unit(signal, "signal");
  if (info.size() != config_.info_dim) {
    throw std::domain_error("forecaster: information vector has dimension " +
                            std::to_string(info.size()) + ", expected " +
                            std::to_string(config_.info_dim));
  }
  for (double x : info) check_unit(x, "information coordinate");
}

double ForecastSession::side_sum(double signal) const {
  if (config_.side_kernel.is_zero()) return 0.0;
  double acc = 0.0;
  for (const auto& r : history_) {
    acc += eval(config_.side_kernel, signal, r.signal) * (r.outcome - r.forecast);
  }
  return acc;
}

std::uint64_t ForecastSession::info_key(const GridTuple& info) const {
  std::uint64_t key = 0;
  const auto base = static_cast<std::uint64_t>(grid_.intervals()) + 1;
  for (int i : info) key = key * base + static_cast<std::uint64_t>(i);
  return key;
}

double ForecastSession::mu(std::uint64_t key) const {
  if (!mu_dense_.empty()) return mu_dense_[key];
  auto it = mu_sparse_.find(key);
  return it == mu_sparse_.end() ? 0.0 : it->second;
}

void ForecastSession::rebuild_accumulator() {
  mu_dense_.clear();
  mu_sparse_.clear();
  cos_sum_ = sin_sum_ = exp_sum_ = 0.0;
  if (route_ == Route::Discretized) {
    const double base = static_cast<double>(grid_.intervals()) + 1.0;
    const double stride = std::pow(base, static_cast<double>(config_.info_dim));
    const double total = stride * base;
    if (total >= 1.8e19) {
      throw std::domain_error("forecaster: grid too fine for information dimension");
    }
    info_stride_ = static_cast<std::uint64_t>(stride);
    if (total <= static_cast<double>(kDenseLimit)) {
      mu_dense_.assign(static_cast<std::size_t>(total), 0.0);
    }
  }
  for (const auto& r : history_) accumulate(r);
}

void ForecastSession::accumulate(const ForecastRecord& r) {
  const double residual = r.outcome - r.forecast;
  switch (route_) {
    case Route::Discretized: {
      const auto pw = weights(grid_, r.forecast);
      std::vector<std::pair<std::uint64_t, double>> iw;
      if (r.info.empty()) {
        iw.push_back({0, 1.0});
      } else {
        for (const auto& e : product_weights(grid_, r.info)) iw.push_back({info_key(e.index), e.weight});
      }
      for (const auto& pe : pw) {
        const auto base = static_cast<std::uint64_t>(pe.index[0]) * info_stride_;
        for (const auto& [key, w] : iw) {
          const double add = pe.weight * w * residual;
          if (!mu_dense_.empty()) {
            mu_dense_[base + key] += add;
          } else {
            mu_sparse_[base + key] += add;
          }
        }
      }
      break;
    }
    case Route::Cosine: {
      const double a = std::numbers::pi * r.forecast / 2.0;
      cos_sum_ += std::cos(a) * residual;
      sin_sum_ += std::sin(a) * residual;
      break;
    }
    case Route::ExpSmooth: {
      const auto& e = std::get<kernel::ExpSmooth>(config_.smooth_kernel->variant());
      double arg = -e.c * r.forecast;
      if (config_.smooth_kernel->dimension() == 2) arg -= e.c2 * r.info[0];
      exp_sum_ += std::exp(arg) * residual;
      break;
    }
    case Route::Direct:
      break;
  }
}

double ForecastSession::u_value(double p, std::span<const double> info, double signal) const {
  validate(p, info, signal);
  return Evaluator(*this, info, signal)(p);
}

double ForecastSession::u_value_direct(double p, std::span<const double> info,
                                       double signal) const {
  validate(p, info, signal);
  const KernelSpec k = rounding_part();
  Point x{p};
  x.insert(x.end(), info.begin(), info.end());
  x.resize(k.dimension());
  double acc = 0.0;
  for (const auto& r : history_) {
    Point xi{r.forecast};
    xi.insert(xi.end(), r.info.begin(), r.info.end());
    xi.resize(k.dimension());
    double kv = eval(k, x, xi);
    if (!config_.side_kernel.is_zero()) kv += eval(config_.side_kernel, signal, r.signal);
    acc += kv * (r.outcome - r.forecast);
  }
  return acc;
}

double ForecastSession::next_forecast(std::span<const double> info, double signal) const {
  validate(0.5, info, signal);
  if (history_.empty()) return 0.5;

  const Evaluator u(*this, info, signal);
  std::array<double, kScanCells + 1> values{};
  bool all_zero = true;
  for (int j = 0; j <= kScanCells; ++j) {
    values[static_cast<std::size_t>(j)] = u(static_cast<double>(j) / kScanCells);
    all_zero = all_zero && std::abs(values[static_cast<std::size_t>(j)]) < kZeroEverywhere;
  }
  if (all_zero) return history_.back().forecast;

  for (int j = 0; j <= kScanCells; ++j) {
    const double vj = values[static_cast<std::size_t>(j)];
    if (std::abs(vj) <= kRootTolerance) return static_cast<double>(j) / kScanCells;
    if (j == kScanCells) break;
    const double vn = values[static_cast<std::size_t>(j + 1)];
    if ((vj < 0.0) == (vn < 0.0)) continue;

    double lo = static_cast<double>(j) / kScanCells;
    double hi = static_cast<double>(j + 1) / kScanCells;
    double flo = vj;
    double fhi = vn;
    for (int it = 0; it < 200 && hi - lo > kBracketWidth; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = u(mid);
      if (std::abs(fm) <= kRootTolerance) return mid;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
  }
  // No sign change on the scan: U(1) > 0 makes p = 1 safe, U(0) < 0 makes p = 0 safe.
  return values[0] > 0.0 ? 1.0 : 0.0;
}

RoundedDraw ForecastSession::randomize_round(double p, std::span<const double> info) {
  check_unit(p, "forecast");
  if (info.size() != config_.info_dim) {
    throw std::domain_error("forecaster: information vector dimension mismatch");
  }
  RoundedDraw out;
  out.forecast = grid_.point(sample(weights(grid_, p), rng_)[0]);
  if (!info.empty()) out.info = grid_values(grid_, sample(product_weights(grid_, info), rng_));
  return out;
}

void ForecastSession::update(double p, std::span<const double> info, double signal, double y) {
  validate(p, info, signal);
  check_unit(y, "outcome");
  if (config_.max_history != 0 && history_.size() >= config_.max_history) {
    throw std::length_error("forecaster: session exceeded its window of " +
                            std::to_string(config_.max_history) + " rounds");
  }
  supermartingale_ += u_value(p, info, signal) * (y - p);
  history_.push_back({p, Point(info.begin(), info.end()), signal, y});
  accumulate(history_.back());

  if (!schedule_.doubling()) return;
  const double next_round = static_cast<double>(history_.size()) + 1.0;
  bool changed = false;
  while (next_round >= schedule_.next_boundary()) {
    ++schedule_.stage;
    schedule_.n_s = stage_boundary(schedule_.stage, schedule_.M);
    const double d = schedule_delta(schedule_, config_.info_dim, side_cf_);
    changed = changed || d != schedule_.delta;
    schedule_.delta = d;
  }
  if (changed) {
    grid_ = RoundingGrid::from_delta(schedule_.delta);
    rebuild_accumulator();
  }
}

}  // namespace defcast
