#include "defcast/arma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "defcast/errors.hpp"

namespace defcast {
namespace {

struct LeastSquares {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
};

// Design columns are rescaled before the QR so the rank test is scale free.
LeastSquares solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::VectorXd scale = x.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0)) throw FitError("arma: design has a zero column");
  }
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < xs.cols()) throw FitError("arma: rank-deficient design");
  LeastSquares out;
  out.beta = qr.solve(y).cwiseQuotient(scale);
  out.residuals = y - x * out.beta;
  if (!out.beta.allFinite()) throw FitError("arma: non-finite coefficients");
  return out;
}

}  // namespace

ArmaModel fit_arma(std::span<const double> series, int p, int q) {
  if (p < 0 || q < 0 || p + q < 1) throw std::domain_error("arma: need p, q >= 0 and p + q >= 1");
  const auto n = static_cast<Eigen::Index>(series.size());
  if (n < 10 * (p + q + 1)) throw FitError("arma: series shorter than 10(p+q+1)");
  for (double v : series) {
    if (!std::isfinite(v)) throw FitError("arma: non-finite value in series");
  }
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*hi - *lo <= 1e-14 * std::max(1.0, std::abs(*hi))) throw FitError("arma: constant series");

  // Stage one: long autoregression for the innovations.
  Eigen::VectorXd innov = Eigen::VectorXd::Zero(n);
  Eigen::Index start = p;
  if (q > 0) {
    const Eigen::Index m = std::min<Eigen::Index>(
        std::max<Eigen::Index>(p + q, static_cast<Eigen::Index>(std::ceil(std::log(double(n)) * 2))),
        (n - 1) / 4);
    Eigen::MatrixXd x(n - m, m + 1);
    Eigen::VectorXd y(n - m);
    for (Eigen::Index t = m; t < n; ++t) {
      x(t - m, 0) = 1.0;
      for (Eigen::Index j = 1; j <= m; ++j) x(t - m, j) = series[t - j];
      y(t - m) = series[t];
    }
    const LeastSquares ls = solve(x, y);
    innov.segment(m, n - m) = ls.residuals;
    start = m + std::max(p, q);
  }

  // Stage two: regression on lagged values and lagged innovations.
  const Eigen::Index rows = n - start;
  if (rows < 2 * (p + q + 1)) throw FitError("arma: too few usable rows");
  Eigen::MatrixXd x(rows, 1 + p + q);
  Eigen::VectorXd y(rows);
  for (Eigen::Index t = start; t < n; ++t) {
    const Eigen::Index r = t - start;
    x(r, 0) = 1.0;
    for (int j = 1; j <= p; ++j) x(r, j) = series[t - j];
    for (int j = 1; j <= q; ++j) x(r, p + j) = innov[t - j];
    y(r) = series[t];
  }
  const LeastSquares ls = solve(x, y);

  ArmaModel model;
  model.intercept = ls.beta[0];
  for (int j = 1; j <= p; ++j) model.ar.push_back(ls.beta[j]);
  for (int j = 1; j <= q; ++j) model.ma.push_back(ls.beta[p + j]);
  model.variance = ls.residuals.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, rows - (1 + p + q)));
  model.fitted = true;
  return model;
}

double forecast_next(const ArmaModel& model, std::span<const double> history) {
  if (!model.fitted) throw FitError("arma: model not fitted");
  if (history.empty()) throw std::domain_error("arma: empty history");
  const std::size_t p = model.ar.size();
  const std::size_t q = model.ma.size();
  const std::size_t n = history.size();

  auto predict = [&](std::size_t t, const std::vector<double>& e) {
    double v = model.intercept;
    for (std::size_t j = 1; j <= p; ++j) {
      v += model.ar[j - 1] * (t >= j ? history[t - j] : history.front());
    }
    for (std::size_t j = 1; j <= q; ++j) {
      if (t >= j) v += model.ma[j - 1] * e[t - j];
    }
    return v;
  };

  std::vector<double> e(n, 0.0);
  if (q > 0) {
    for (std::size_t t = 0; t < n; ++t) e[t] = history[t] - predict(t, e);
  }
  const double f = predict(n, e);
  if (!std::isfinite(f)) throw NumericalError("arma: non-finite forecast");
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace defcast
