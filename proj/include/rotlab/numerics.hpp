#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "rotlab/errors.hpp"

namespace rotlab {

template <class Real>
inline constexpr Real two_pi_v = Real(2) * std::numbers::pi_v<Real>;

inline constexpr double kTwoPi = two_pi_v<double>;
inline constexpr double kPi = std::numbers::pi_v<double>;

/// Neumaier-compensated accumulator for long sums.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fractional part mapped into [0, 1).
template <class Real>
inline Real wrap_unit(Real x) {
  using std::floor;
  Real f = x - floor(x);
  if (f >= Real(1)) f -= Real(1);
  if (f < Real(0)) f += Real(1);
  return f;
}

using RealFn = std::function<double(double)>;

/// Mean of a 1-periodic function over one period by the N-point uniform
/// trapezoid rule (left-endpoint sum; spectrally accurate for smooth
/// periodic integrands).
inline double periodic_mean(const RealFn& g, int n) {
  CompensatedSum s;
  for (int i = 0; i < n; ++i) s.add(g(static_cast<double>(i) / n));
  return s.value() / n;
}

/// Solve g(x) = y for strictly increasing g on [lo, hi]. Bisection to
/// xtol, then up to two derivative steps clamped to the bracket.
inline double solve_increasing(const RealFn& g, double y, double lo, double hi,
                               double xtol = 1e-15,
                               const RealFn* dg = nullptr) {
  double glo = g(lo) - y;
  double ghi = g(hi) - y;
  if (glo > 0.0 || ghi < 0.0)
    throw InverseNotConverged("root not bracketed in solve_increasing");
  while (hi - lo > xtol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double gm = g(mid) - y;
    if (gm < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  if (dg) {
    for (int i = 0; i < 2; ++i) {
      double d = (*dg)(x);
      if (d <= 0.0) break;
      double step = (g(x) - y) / d;
      double xn = x - step;
      if (xn < lo || xn > hi) break;
      x = xn;
    }
  }
  return x;
}

/// Cumulative antiderivative table of a 1-periodic function on the uniform
/// grid {i/n}: values[i] ~ integral of g from 0 to i/n. Trapezoid with an
/// O(h^2) endpoint correction from finite-difference slopes, so smooth
/// integrands come out near machine accuracy.
inline std::vector<double> cumulative_primitive_table(const RealFn& g, int n) {
  std::vector<double> gv(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) gv[i] = g(static_cast<double>(i) / n);
  const double h = 1.0 / n;
  std::vector<double> out(static_cast<size_t>(n) + 1);
  out[0] = 0.0;
  CompensatedSum acc;
  auto slope = [&](int i) {
    // central difference with periodic wrap
    int im = (i == 0) ? n - 1 : i - 1;
    int ip = (i == n) ? 1 : i + 1;
    return (gv[ip] - gv[im]) / (2.0 * h);
  };
  const double s0 = slope(0);
  for (int i = 1; i <= n; ++i) {
    acc.add(0.5 * h * (gv[i - 1] + gv[i]));
    out[i] = acc.value() - h * h / 12.0 * (slope(i) - s0);
  }
  return out;
}

}  // namespace rotlab
