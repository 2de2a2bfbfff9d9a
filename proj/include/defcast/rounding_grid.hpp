#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "defcast/random.hpp"

namespace defcast {

/// Integer indices of grid points, one per coordinate.
using GridTuple = std::vector<int>;

/// Uniform partition {0, Δ, 2Δ, ..., 1} of [0,1] with Δ = 1/K.
class RoundingGrid {
 public:
  /// Largest supported K. Keeps tuple keys for k+1 <= 3 inside 64 bits.
  static constexpr int kMaxIntervals = 1 << 20;

  explicit RoundingGrid(int intervals);

  /// Throws std::domain_error unless delta is 1/K (to 1e-12) for an integer K.
  static RoundingGrid from_delta(double delta);

  int intervals() const noexcept { return intervals_; }
  double delta() const noexcept { return 1.0 / intervals_; }
  double point(int i) const noexcept { return static_cast<double>(i) / intervals_; }
  std::vector<double> points() const;

  bool operator==(const RoundingGrid&) const = default;

 private:
  int intervals_;
};

struct WeightEntry {
  GridTuple index;
  double weight;
};

/// Sparse probability distribution over grid tuples of a fixed dimension.
/// Entries are sorted by index and carry strictly positive weights.
class WeightVector {
 public:
  WeightVector(std::size_t dimension, std::vector<WeightEntry> entries);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<WeightEntry>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// Zero for tuples outside the support.
  double weight_at(const GridTuple& index) const;

  /// Euclidean dot product of the two weight vectors.
  double dot(const WeightVector& other) const;

  /// Σ_v w[v]·v for one coordinate.
  double mean(const RoundingGrid& grid, std::size_t coordinate) const;

 private:
  std::size_t dimension_;
  std::vector<WeightEntry> entries_;
};

/// Two-point rounding weights of p: the bracketing grid points get
/// 1 - (p - v_{i-1})/Δ and 1 - (v_i - p)/Δ. A grid point maps to itself.
WeightVector weights(const RoundingGrid& grid, double p);

/// Product distribution W_v(x) = Π_s w_{v_s}(x_s) over V^k.
WeightVector product_weights(const RoundingGrid& grid, std::span<const double> x);

/// Draws a tuple from w with one uniform per coordinate, in coordinate order.
GridTuple sample(const WeightVector& w, RandomSource& rng);

/// Grid values of a tuple.
std::vector<double> grid_values(const RoundingGrid& grid, const GridTuple& index);

/// (W̄(a) · W̄(b)).
double rounding_kernel(const RoundingGrid& grid, std::span<const double> a,
                       std::span<const double> b);

}  // namespace defcast
