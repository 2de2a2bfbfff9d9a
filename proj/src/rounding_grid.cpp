#include "defcast/rounding_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace defcast {

namespace {

constexpr double kSnap = 1e-12;

struct Bracket {
  int lower;
  double upper_weight;  // 0 when p sits on the lower grid point
};

Bracket bracket(const RoundingGrid& grid, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("rounding: value " + std::to_string(p) + " outside [0,1]");
  }
  const int k = grid.intervals();
  const double t = p * k;
  int lower = static_cast<int>(std::floor(t));
  double frac = t - lower;
  if (lower >= k) return {k, 0.0};
  if (frac < kSnap) return {lower, 0.0};
  if (frac > 1.0 - kSnap) return {lower + 1, 0.0};
  return {lower, frac};
}

}  // namespace

RoundingGrid::RoundingGrid(int intervals) : intervals_(intervals) {
  if (intervals < 1 || intervals > kMaxIntervals) {
    throw std::domain_error("rounding grid: interval count " + std::to_string(intervals) +
                            " out of range");
  }
}

RoundingGrid RoundingGrid::from_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::domain_error("rounding grid: delta must lie in (0,1]");
  }
  const double k = std::round(1.0 / delta);
  if (k > kMaxIntervals || std::abs(delta * k - 1.0) > 1e-12) {
    throw std::domain_error("rounding grid: delta " + std::to_string(delta) +
                            " is not the reciprocal of an integer");
  }
  return RoundingGrid(static_cast<int>(k));
}

std::vector<double> RoundingGrid::points() const {
  std::vector<double> out(static_cast<std::size_t>(intervals_) + 1);
  for (int i = 0; i <= intervals_; ++i) out[static_cast<std::size_t>(i)] = point(i);
  return out;
}

WeightVector::WeightVector(std::size_t dimension, std::vector<WeightEntry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  if (dimension_ == 0) throw std::domain_error("weight vector: dimension must be positive");
  std::erase_if(entries_, [](const WeightEntry& e) { return e.weight <= 0.0; });
  for (const auto& e : entries_) {
    if (e.index.size() != dimension_) {
      throw std::domain_error("weight vector: tuple dimension mismatch");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const WeightEntry& a, const WeightEntry& b) { return a.index < b.index; });
}

double WeightVector::weight_at(const GridTuple& index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const WeightEntry& e, const GridTuple& v) { return e.index < v; });
  return (it != entries_.end() && it->index == index) ? it->weight : 0.0;
}

double WeightVector::dot(const WeightVector& other) const {
  if (other.dimension_ != dimension_) {
    throw std::domain_error("weight vector: dot of different dimensions");
  }
  // Both sides sorted: merge.
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      sum += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return sum;
}

double WeightVector::mean(const RoundingGrid& grid, std::size_t coordinate) const {
  double m = 0.0;
  for (const auto& e : entries_) m += e.weight * grid.point(e.index.at(coordinate));
  return m;
}

WeightVector weights(const RoundingGrid& grid, double p) {
  const auto [lower, upper_weight] = bracket(grid, p);
  std::vector<WeightEntry> entries;
  if (upper_weight == 0.0) {
    entries.push_back({{lower}, 1.0});
  } else {
    entries.push_back({{lower}, 1.0 - upper_weight});
    entries.push_back({{lower + 1}, upper_weight});
  }
  return WeightVector(1, std::move(entries));
}

WeightVector product_weights(const RoundingGrid& grid, std::span<const double> x) {
  if (x.empty()) throw std::domain_error("product weights: empty vector");
  std::vector<WeightEntry> entries{{GridTuple{}, 1.0}};
  for (double xs : x) {
    const auto [lower, upper_weight] = bracket(grid, xs);
    std::vector<WeightEntry> next;
    next.reserve(entries.size() * 2);
    for (const auto& e : entries) {
      GridTuple lo = e.index;
      lo.push_back(lower);
      if (upper_weight == 0.0) {
        next.push_back({std::move(lo), e.weight});
        continue;
      }
      GridTuple hi = e.index;
      hi.push_back(lower + 1);
      next.push_back({std::move(lo), e.weight * (1.0 - upper_weight)});
      next.push_back({std::move(hi), e.weight * upper_weight});
    }
    entries = std::move(next);
  }
  return WeightVector(x.size(), std::move(entries));
}

GridTuple sample(const WeightVector& w, RandomSource& rng) {
  // Sequential conditional sampling: coordinate s is drawn from its marginal
  // given the coordinates already chosen.
  GridTuple chosen;
  chosen.reserve(w.dimension());
  std::vector<const WeightEntry*> alive;
  alive.reserve(w.size());
  for (const auto& e : w) alive.push_back(&e);

  for (std::size_t s = 0; s < w.dimension(); ++s) {
    double total = 0.0;
    for (const auto* e : alive) total += e->weight;
    const double u = rng.uniform() * total;

    // Candidate values for this coordinate in increasing order.
    std::vector<int> values;
    for (const auto* e : alive) values.push_back(e->index[s]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    int pick = values.back();
    double acc = 0.0;
    for (int v : values) {
      for (const auto* e : alive) {
        if (e->index[s] == v) acc += e->weight;
      }
      if (u < acc) {
        pick = v;
        break;
      }
    }
    chosen.push_back(pick);
    std::erase_if(alive, [&](const WeightEntry* e) { return e->index[s] != pick; });
  }
  return chosen;
}

std::vector<double> grid_values(const RoundingGrid& grid, const GridTuple& index) {
  std::vector<double> out;
  out.reserve(index.size());
  for (int i : index) out.push_back(grid.point(i));
  return out;
}

double rounding_kernel(const RoundingGrid& grid, std::span<const double> a,
                       std::span<const double> b) {
  if (a.size() != b.size()) throw std::domain_error("rounding kernel: dimension mismatch");
  if (a.empty()) throw std::domain_error("rounding kernel: empty points");
  // The product structure factorises the dot product per coordinate.
  double value = 1.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    value *= weights(grid, a[s]).dot(weights(grid, b[s]));
  }
  return value;
}

}  // namespace defcast
