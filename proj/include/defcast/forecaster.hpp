#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "defcast/kernels.hpp"
#include "defcast/random.hpp"
#include "defcast/rounding_grid.hpp"

namespace defcast {

struct FixedDelta {
  double delta;
};

/// Staged refinement: stage s runs from round n_s = (s+M)^M, M = ceil(1/epsilon).
struct DoublingTrick {
  double epsilon;
};

using ScheduleMode = std::variant<FixedDelta, DoublingTrick>;

struct ScheduleState {
  ScheduleMode mode = FixedDelta{0.1};
  int M = 0;           // ceil(1/epsilon); 0 in fixed mode
  int stage = 0;
  double n_s = 1.0;    // first round of the current stage
  double delta = 0.1;  // grid resolution in force

  bool doubling() const noexcept { return std::holds_alternative<DoublingTrick>(mode); }
  /// First round of the next stage; +inf in fixed mode.
  double next_boundary() const;
};

/// (s + M)^M as a double (it overflows 64-bit integers for small epsilon).
double stage_boundary(int s, int M);

/// ((k+1)/2)^{2/(k+3)} (cF^2+1)^{1/(k+3)} n^{-1/(k+3)}, before clamping.
double optimal_delta(std::size_t k, double cF, double n);

/// Largest valid grid resolution 1/K not above raw, with K >= 2.
double clamp_to_grid_delta(double raw);

/// Resolution for the state's current stage; the fixed Δ in fixed mode.
double schedule_delta(const ScheduleState& schedule, std::size_t k, double cF);

/// Initial state for a mode. Throws std::domain_error for invalid Δ or ε.
ScheduleState make_schedule(const ScheduleMode& mode, std::size_t k, double cF);

/// n_{s+1} >= (2sΔ_s + Δ_{s+1}) / (Δ_{s+1}(2s+1)) · n_s for stage s of a
/// doubling schedule.
bool stage_transition_condition(int s, int M, std::size_t k, double cF);

struct ForecasterConfig {
  /// Dimension k of the information vector x̄.
  std::size_t info_dim = 1;
  /// Kernel R over scalar signals.
  KernelSpec side_kernel = KernelSpec::zero(1);
  /// Replaces the discretized rounding kernel inside U_n when set. Its
  /// dimension d <= k+1 selects the leading coordinates of (p, x̄).
  std::optional<KernelSpec> smooth_kernel;
  ScheduleMode schedule = FixedDelta{0.1};
  /// Maximum number of rounds; 0 means unlimited.
  std::size_t max_history = 5000;
};

struct ForecastRecord {
  double forecast;
  Point info;
  double signal;
  double outcome;
};

struct RoundedDraw {
  double forecast;
  Point info;
};

/// Defensive forecaster with randomized rounding.
///
/// Each round the caller asks for next_forecast(x̄_n, x_n), optionally
/// randomizes it, then reports the outcome through update(). The forecast is
/// a root of U_n(p) = Σ_{i<n} [K((p,x̄_n),(p_i,x̄_i)) + R(x_n,x_i)](y_i - p_i),
/// which keeps 𝓜_n = 𝓜_{n-1} + U_n(p_n)(y_n - p_n) non-increasing.
class ForecastSession {
 public:
  ForecastSession(ForecasterConfig config, RandomSource rng);

  double u_value(double p, std::span<const double> info, double signal) const;

  /// U_n from the kernel definition, summing over the whole history. Used as
  /// a reference for u_value and as the fallback for general smooth kernels.
  double u_value_direct(double p, std::span<const double> info, double signal) const;

  double next_forecast(std::span<const double> info, double signal) const;

  /// Rounds p and x̄ on the current grid: one uniform for the forecast, then
  /// one per information coordinate in index order.
  RoundedDraw randomize_round(double p, std::span<const double> info);

  void update(double p, std::span<const double> info, double signal, double y);

  double supermartingale() const noexcept { return supermartingale_; }
  const std::vector<ForecastRecord>& history() const noexcept { return history_; }
  const ScheduleState& schedule() const noexcept { return schedule_; }
  const RoundingGrid& grid() const noexcept { return grid_; }
  const ForecasterConfig& config() const noexcept { return config_; }
  std::size_t info_dim() const noexcept { return config_.info_dim; }
  /// c_F of the side kernel.
  double side_embedding_constant() const noexcept { return side_cf_; }
  /// Kernel used for the (p, x̄) part of U_n right now.
  KernelSpec rounding_part() const;

 private:
  enum class Route { Discretized, Cosine, ExpSmooth, Direct };

  class Evaluator;
  friend class Evaluator;

  void validate(double p, std::span<const double> info, double signal) const;
  double side_sum(double signal) const;
  std::uint64_t info_key(const GridTuple& info) const;
  void rebuild_accumulator();
  void accumulate(const ForecastRecord& r);
  double mu(std::uint64_t key) const;

  ForecasterConfig config_;
  RandomSource rng_;
  ScheduleState schedule_;
  RoundingGrid grid_;
  double side_cf_;
  Route route_;

  std::vector<ForecastRecord> history_;
  double supermartingale_ = 1.0;

  // Σ_i W_v(p_i, x̄_i)(y_i - p_i) keyed by the mixed-radix tuple index v.
  std::vector<double> mu_dense_;
  std::unordered_map<std::uint64_t, double> mu_sparse_;
  std::uint64_t info_stride_ = 1;  // (K+1)^k

  // Running sums for the factorised smooth kernels.
  double cos_sum_ = 0.0;
  double sin_sum_ = 0.0;
  double exp_sum_ = 0.0;
};

}  // namespace defcast
