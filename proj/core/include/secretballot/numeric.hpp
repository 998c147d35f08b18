#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

// Small numeric building blocks shared by the optimizers and the sampler.
// Everything here is deterministic: same inputs, same bits, no global state.

namespace secretballot {

inline constexpr double kGoldenSection = 0.6180339887498949;  // (sqrt(5)-1)/2
inline constexpr double kZ975 = 1.959963984540054;            // 97.5% standard normal quantile

/// P{Z <= z} for standard normal Z, accurate in both tails.
inline double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2_v<double>);
}

/// P{Z > z} for standard normal Z.
inline double standard_normal_tail(double z) {
  return 0.5 * std::erfc(z / std::numbers::sqrt2_v<double>);
}

/// Inverse of standard_normal_cdf on (0, 1), good to ~1 ulp away from the
/// extreme tails (Wichura's PPND16 rational approximations).
double inverse_normal_cdf(double p);

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Minimizes a unimodal f over [lo, hi] until the bracket is narrower than
/// x_tol. Returns the bracket midpoint and its value.
template <typename F>
GoldenResult golden_section_minimize(F&& f, double lo, double hi, double x_tol,
                                     int max_iterations = 240) {
  double a = lo;
  double b = hi;
  double x1 = b - kGoldenSection * (b - a);
  double x2 = a + kGoldenSection * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  int used = 0;
  while (b - a > x_tol && used < max_iterations) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGoldenSection * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGoldenSection * (b - a);
      f2 = f(x2);
    }
    ++used;
  }
  const double mid = 0.5 * (a + b);
  return {mid, f(mid), used};
}

struct BisectResult {
  double x = 0.0;
  int iterations = 0;
  bool bracketed = false;
};

/// Root of f by bisection on [a, b]; requires f(a) and f(b) of opposite sign
/// (otherwise returns bracketed=false and the midpoint).
template <typename F>
BisectResult bisect_root(F&& f, double a, double b, int max_iterations = 120) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return {a, 0, true};
  if (fb == 0.0) return {b, 0, true};
  if (std::signbit(fa) == std::signbit(fb) || std::isnan(fa) || std::isnan(fb)) {
    return {0.5 * (a + b), 0, false};
  }
  int used = 0;
  while (used < max_iterations) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;  // interval exhausted at double precision
    const double fm = f(m);
    ++used;
    if (fm == 0.0) return {m, used, true};
    if (std::signbit(fm) == std::signbit(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return {0.5 * (a + b), used, true};
}

/// x * log(y) with the convention 0 * log(0) = 0; -inf when x > 0 and y == 0.
inline double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

}  // namespace secretballot
