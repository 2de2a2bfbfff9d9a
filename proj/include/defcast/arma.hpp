#pragma once

#include <span>
#include <vector>

namespace defcast {

struct ArmaModel {
  std::vector<double> ar;  // φ_1..φ_p
  std::vector<double> ma;  // θ_1..θ_q
  double intercept = 0.0;
  double variance = 0.0;   // innovation variance of the final regression
  bool fitted = false;
};

/// Two-stage Hannan–Rissanen fit: a long autoregression estimates the
/// innovations, then a least-squares regression on p lagged values and q
/// lagged innovations gives the coefficients.
///
/// Requires p + q >= 1 and series.size() >= 10·(p+q+1). Throws FitError for
/// a degenerate (constant or rank-deficient) design.
ArmaModel fit_arma(std::span<const double> series, int p, int q);

/// One-step conditional mean given the history, clamped to [0,1].
/// Innovations over the history are reconstructed recursively starting from
/// zero. Throws FitError on an unfitted model and std::domain_error on an
/// empty history.
double forecast_next(const ArmaModel& model, std::span<const double> history);

}  // namespace defcast
