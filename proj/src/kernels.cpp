#include "defcast/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "defcast/errors.hpp"

namespace defcast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sobolev_1d(double t, double u) {
  return std::cosh(std::min(t, u)) * std::cosh(std::min(1.0 - t, 1.0 - u)) / std::sinh(1.0);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string("kernel: ") + what + " must be positive");
  }
}

}  // namespace

KernelSpec::KernelSpec(Variant v, std::size_t dimension)
    : variant_(std::move(v)), dimension_(dimension) {
  if (dimension_ == 0) throw std::domain_error("kernel: dimension must be positive");
}

KernelSpec KernelSpec::sobolev(std::size_t dimension) {
  return KernelSpec(kernel::Sobolev{}, dimension);
}

KernelSpec KernelSpec::gaussian(double sigma, std::size_t dimension) {
  require_positive(sigma, "sigma");
  return KernelSpec(kernel::Gaussian{sigma}, dimension);
}

KernelSpec KernelSpec::cosine_half_pi(std::size_t dimension) {
  return KernelSpec(kernel::CosineHalfPi{}, dimension);
}

KernelSpec KernelSpec::exp_smooth(double c, double c2, std::size_t dimension) {
  require_positive(c, "c");
  require_positive(c2, "c2");
  if (dimension > 2) throw std::domain_error("kernel: exp-smooth supports dimension 1 or 2");
  return KernelSpec(kernel::ExpSmooth{c, c2}, dimension);
}

KernelSpec KernelSpec::discretized(const RoundingGrid& grid, std::size_t dimension) {
  return KernelSpec(kernel::DiscretizedRounding{grid}, dimension);
}

KernelSpec KernelSpec::zero(std::size_t dimension) { return KernelSpec(kernel::Zero{}, dimension); }

KernelSpec KernelSpec::sum(std::vector<KernelSpec> members) {
  if (members.empty()) throw std::domain_error("kernel: empty sum");
  const std::size_t dim = members.front().dimension();
  for (const auto& m : members) {
    if (m.dimension() != dim) throw std::domain_error("kernel: sum members differ in dimension");
  }
  return KernelSpec(kernel::Sum{std::move(members)}, dim);
}

bool KernelSpec::is_symmetric() const {
  return std::visit(Overloaded{
                        [](const kernel::ExpSmooth&) { return false; },
                        [](const kernel::Sum& s) {
                          for (const auto& m : s.members) {
                            if (!m.is_symmetric()) return false;
                          }
                          return true;
                        },
                        [](const auto&) { return true; },
                    },
                    variant_);
}

std::string KernelSpec::name() const {
  return std::visit(Overloaded{
                        [](const kernel::Sobolev&) -> std::string { return "sobolev"; },
                        [](const kernel::Gaussian&) -> std::string { return "gaussian"; },
                        [](const kernel::CosineHalfPi&) -> std::string { return "cosine"; },
                        [](const kernel::ExpSmooth&) -> std::string { return "expsmooth"; },
                        [](const kernel::DiscretizedRounding&) -> std::string {
                          return "discretized";
                        },
                        [](const kernel::Zero&) -> std::string { return "zero"; },
                        [](const kernel::Sum& s) {
                          std::string out = "sum(";
                          for (std::size_t i = 0; i < s.members.size(); ++i) {
                            if (i) out += ",";
                            out += s.members[i].name();
                          }
                          return out + ")";
                        },
                    },
                    variant_);
}

double eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
  if (x.size() != k.dimension() || y.size() != k.dimension()) {
    throw std::domain_error("kernel " + k.name() + ": expected dimension " +
                            std::to_string(k.dimension()));
  }
  return std::visit(
      Overloaded{
          [&](const kernel::Sobolev&) {
            double v = 1.0;
            for (std::size_t s = 0; s < x.size(); ++s) v *= sobolev_1d(x[s], y[s]);
            return v;
          },
          [&](const kernel::Gaussian& g) {
            double d2 = 0.0;
            for (std::size_t s = 0; s < x.size(); ++s) d2 += (x[s] - y[s]) * (x[s] - y[s]);
            return std::exp(-d2 / (g.sigma * g.sigma));
          },
          [&](const kernel::CosineHalfPi&) {
            double v = 1.0;
            for (std::size_t s = 0; s < x.size(); ++s) {
              v *= std::cos(std::numbers::pi * (x[s] - y[s]) / 2.0);
            }
            return v;
          },
          [&](const kernel::ExpSmooth& e) {
            double arg = e.c * (x[0] - y[0]);
            if (x.size() == 2) arg += e.c2 * (x[1] - y[1]);
            return std::exp(arg);
          },
          [&](const kernel::DiscretizedRounding& d) { return rounding_kernel(d.grid, x, y); },
          [](const kernel::Zero&) { return 0.0; },
          [&](const kernel::Sum& s) {
            double v = 0.0;
            for (const auto& m : s.members) v += eval(m, x, y);
            return v;
          },
      },
      k.variant());
}

double embedding_constant(const KernelSpec& k) {
  const auto d = static_cast<double>(k.dimension());
  return std::visit(
      Overloaded{
          // K(t,t) peaks at the endpoints with value coth(1).
          [&](const kernel::Sobolev&) { return std::pow(1.0 / std::tanh(1.0), d / 2.0); },
          [](const kernel::Gaussian&) { return 1.0; },
          [](const kernel::CosineHalfPi&) { return 1.0; },
          [](const kernel::ExpSmooth&) -> double {
            throw std::domain_error("kernel: exp-smooth has no embedding constant");
          },
          [](const kernel::DiscretizedRounding&) { return 1.0; },
          [](const kernel::Zero&) { return 0.0; },
          [](const kernel::Sum& s) {
            double sq = 0.0;
            for (const auto& m : s.members) {
              const double c = embedding_constant(m);
              sq += c * c;
            }
            return std::sqrt(sq);
          },
      },
      k.variant());
}

Eigen::MatrixXd gram(const KernelSpec& k, const std::vector<Point>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = eval(k, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

InducedFunction::InducedFunction(KernelSpec kernel, std::vector<Point> centers,
                                 std::vector<double> coefficients)
    : kernel_(std::move(kernel)),
      centers_(std::move(centers)),
      coefficients_(std::move(coefficients)) {
  if (centers_.empty() || centers_.size() != coefficients_.size()) {
    throw std::domain_error("induced function: need equal, nonzero numbers of centers and coefficients");
  }
  for (const auto& c : centers_) {
    if (c.size() != kernel_.dimension()) {
      throw std::domain_error("induced function: center dimension mismatch");
    }
  }
}

InducedFunction InducedFunction::single(KernelSpec kernel, double center, double alpha) {
  return InducedFunction(std::move(kernel), {Point{center}}, {alpha});
}

double InducedFunction::operator()(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    if (coefficients_[j] != 0.0) v += coefficients_[j] * eval(kernel_, centers_[j], x);
  }
  return v;
}

double induced_norm(const InducedFunction& f) {
  if (!f.kernel().is_symmetric()) {
    throw std::domain_error("induced norm: kernel " + f.kernel().name() + " is not symmetric");
  }
  const Eigen::MatrixXd g = gram(f.kernel(), f.centers());
  const Eigen::Map<const Eigen::VectorXd> alpha(f.coefficients().data(),
                                                static_cast<Eigen::Index>(f.coefficients().size()));
  const double q = alpha.dot(g * alpha);
  if (q < -1e-8) {
    throw NumericalError("induced norm: negative quadratic form " + std::to_string(q));
  }
  return std::sqrt(std::max(q, 0.0));
}

double sup_norm(const InducedFunction& f, std::size_t scan_points) {
  if (f.kernel().dimension() != 1) throw std::domain_error("sup norm: one-dimensional functions only");
  if (scan_points < 2) throw std::domain_error("sup norm: need at least two scan points");
  double best = 0.0;
  for (std::size_t i = 0; i < scan_points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(scan_points - 1);
    best = std::max(best, std::abs(f(x)));
  }
  return best;
}

}  // namespace defcast
