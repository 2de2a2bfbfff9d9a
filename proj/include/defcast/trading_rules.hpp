#pragma once

#include <cstddef>
#include <vector>

namespace defcast {

/// Finite-range step function on [0,1]: D(x) = values[j] where j is the
/// number of breakpoints strictly below x. With breakpoint 0.5 and values
/// (+1, -1), D is +1 on [0, 0.5] and -1 on (0.5, 1].
class DecisionRule {
 public:
  DecisionRule(std::vector<double> breakpoints, std::vector<double> values);

  double operator()(double x) const { return values_[piece(x)]; }
  std::size_t piece(double x) const;

  /// Index of D(x) among the distinct values (sorted ascending).
  std::size_t value_index(double x) const;
  const std::vector<double>& distinct_values() const noexcept { return distinct_; }
  std::size_t range_size() const noexcept { return distinct_.size(); }
  double sup_norm() const;

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::vector<double> distinct_;
};

}  // namespace defcast
