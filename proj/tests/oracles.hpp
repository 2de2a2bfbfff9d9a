#pragma once

// Independent reference implementations for tests. Nothing here calls into
// the library's numerical code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

// Triangular (hat) form of the two-point rounding weight of p at grid point v.
inline double hat(double p, double v, double delta) {
  return std::max(0.0, 1.0 - std::abs(p - v) / delta);
}

// Weight of every grid point 0..K.
inline std::vector<double> dense_weights(int intervals, double p) {
  std::vector<double> w(intervals + 1);
  for (int i = 0; i <= intervals; ++i) w[i] = hat(p, double(i) / intervals, 1.0 / intervals);
  return w;
}

// Σ over every tuple of V^k of Π_s hat(a_s) · Π_s hat(b_s).
inline double rounding_kernel(int intervals, const std::vector<double>& a,
                              const std::vector<double>& b) {
  const std::size_t k = a.size();
  std::vector<int> idx(k, 0);
  double total = 0.0;
  while (true) {
    double wa = 1.0, wb = 1.0;
    for (std::size_t s = 0; s < k; ++s) {
      const double v = double(idx[s]) / intervals;
      wa *= hat(a[s], v, 1.0 / intervals);
      wb *= hat(b[s], v, 1.0 / intervals);
    }
    total += wa * wb;
    std::size_t s = 0;
    while (s < k && ++idx[s] > intervals) idx[s++] = 0;
    if (s == k) break;
  }
  return total;
}

inline double sobolev(double t, double u) {
  return std::cosh(std::min(t, u)) * std::cosh(std::min(1.0 - t, 1.0 - u)) / std::sinh(1.0);
}

inline double cosine_half_pi(double t, double u) { return std::cos(M_PI * (t - u) / 2.0); }

struct Round {
  double p;
  std::vector<double> info;
  double signal;
  double y;
};

using Kernel2 = std::function<double(const std::vector<double>&, const std::vector<double>&)>;
using Kernel1 = std::function<double(double, double)>;

// U(p) = Σ_i [K((p, x̄), (p_i, x̄_i)) + R(x, x_i)](y_i - p_i), summed term by term.
inline double u_value(const std::vector<Round>& history, double p, const std::vector<double>& info,
                      double signal, const Kernel2& k, const Kernel1& r) {
  std::vector<double> z{p};
  z.insert(z.end(), info.begin(), info.end());
  double u = 0.0;
  for (const auto& h : history) {
    std::vector<double> zi{h.p};
    zi.insert(zi.end(), h.info.begin(), h.info.end());
    u += (k(z, zi) + (r ? r(signal, h.signal) : 0.0)) * (h.y - h.p);
  }
  return u;
}

// Squared norm of Σ_n (W̄(z_n) ⊕ Φ(x_n)) r_n, accumulating the weight
// vectors explicitly on a dense tuple map.
inline double residual_norm_sq(int intervals, const std::vector<Round>& history, const Kernel1& r) {
  std::map<std::vector<int>, double> acc;
  for (const auto& h : history) {
    std::vector<double> z{h.p};
    z.insert(z.end(), h.info.begin(), h.info.end());
    // Enumerate the ≤ 2^{k+1} tuples with nonzero hat weight.
    std::vector<std::vector<std::pair<int, double>>> per(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) {
      for (int i = 0; i <= intervals; ++i) {
        const double w = hat(z[s], double(i) / intervals, 1.0 / intervals);
        if (w > 0.0) per[s].push_back({i, w});
      }
    }
    std::vector<std::size_t> pos(z.size(), 0);
    while (true) {
      std::vector<int> key(z.size());
      double w = 1.0;
      for (std::size_t s = 0; s < z.size(); ++s) {
        key[s] = per[s][pos[s]].first;
        w *= per[s][pos[s]].second;
      }
      acc[key] += w * (h.y - h.p);
      std::size_t s = 0;
      while (s < z.size() && ++pos[s] == per[s].size()) pos[s++] = 0;
      if (s == z.size()) break;
    }
  }
  double sq = 0.0;
  for (const auto& [_, v] : acc) sq += v * v;
  if (r) {
    for (const auto& a : history) {
      for (const auto& b : history) sq += r(a.signal, b.signal) * (a.y - a.p) * (b.y - b.p);
    }
  }
  return sq;
}

}  // namespace oracle
