#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "defcast/rounding_grid.hpp"

namespace defcast {

using Point = std::vector<double>;

class KernelSpec;

namespace kernel {

/// H^1([0,1]) reproducing kernel, tensor product over coordinates.
struct Sobolev {};
/// exp(-|x - y|^2 / sigma^2).
struct Gaussian {
  double sigma;
};
/// Product of cos(pi/2 (t - t')) over coordinates.
struct CosineHalfPi {};
/// exp(c (p - p') + c2 (x - x')). Not symmetric; only used inside U_n.
struct ExpSmooth {
  double c;
  double c2;
};
/// Dot product of product rounding weights on a grid.
struct DiscretizedRounding {
  RoundingGrid grid;
};
struct Zero {};
struct Sum {
  std::vector<KernelSpec> members;
};

}  // namespace kernel

/// Immutable kernel description over [0,1]^dimension.
class KernelSpec {
 public:
  using Variant = std::variant<kernel::Sobolev, kernel::Gaussian, kernel::CosineHalfPi,
                               kernel::ExpSmooth, kernel::DiscretizedRounding, kernel::Zero,
                               kernel::Sum>;

  static KernelSpec sobolev(std::size_t dimension = 1);
  static KernelSpec gaussian(double sigma, std::size_t dimension = 1);
  static KernelSpec cosine_half_pi(std::size_t dimension = 1);
  static KernelSpec exp_smooth(double c, double c2, std::size_t dimension = 2);
  static KernelSpec discretized(const RoundingGrid& grid, std::size_t dimension);
  static KernelSpec zero(std::size_t dimension = 1);
  static KernelSpec sum(std::vector<KernelSpec> members);

  const Variant& variant() const noexcept { return variant_; }
  std::size_t dimension() const noexcept { return dimension_; }
  bool is_symmetric() const;
  bool is_zero() const noexcept { return std::holds_alternative<kernel::Zero>(variant_); }
  std::string name() const;

 private:
  KernelSpec(Variant v, std::size_t dimension);

  Variant variant_;
  std::size_t dimension_;
};

double eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y);

/// Scalar convenience for one-dimensional kernels.
inline double eval(const KernelSpec& k, double x, double y) {
  return eval(k, std::span<const double>(&x, 1), std::span<const double>(&y, 1));
}

/// sup_x sqrt(K(x, x)). Throws std::domain_error for ExpSmooth, which
/// induces no RKHS.
double embedding_constant(const KernelSpec& k);

Eigen::MatrixXd gram(const KernelSpec& k, const std::vector<Point>& points);

/// f = Σ_j α_j K(x_j, ·).
class InducedFunction {
 public:
  InducedFunction(KernelSpec kernel, std::vector<Point> centers, std::vector<double> coefficients);

  /// Single-center 1-D helper: alpha · K(center, ·).
  static InducedFunction single(KernelSpec kernel, double center, double alpha = 1.0);

  double operator()(std::span<const double> x) const;
  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const std::vector<Point>& centers() const noexcept { return centers_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }

 private:
  KernelSpec kernel_;
  std::vector<Point> centers_;
  std::vector<double> coefficients_;
};

/// RKHS norm sqrt(αᵀ G α). Throws NumericalError when the quadratic form is
/// below -1e-8.
double induced_norm(const InducedFunction& f);

/// max |f| over an evenly spaced scan of [0,1] (one-dimensional f only).
double sup_norm(const InducedFunction& f, std::size_t scan_points = 10001);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace defcast
