#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "optreg/core/error.hpp"

namespace optreg {

/// `count` logarithmically spaced points covering [lo, hi] inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  require(lo > 0.0 && hi >= lo && count >= 1, ErrorKind::InvalidArgument, "invalid log grid");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct GridScan {
  std::vector<double> points;
  std::vector<double> values;
  std::size_t best = 0;  // smallest index attaining the minimum
};

/// Evaluates f on every grid point; NaN counts as +∞ and ties go to the smaller λ.
inline GridScan scan(const std::vector<double>& points, const std::function<double(double)>& f) {
  GridScan s{points, std::vector<double>(points.size()), 0};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    double v = f(points[i]);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    s.values[i] = v;
    if (v < best) {
      best = v;
      s.best = i;
    }
  }
  return s;
}

struct Minimum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a minimum of f on [lo, hi], in log-coordinates,
/// until the bracket's relative width is below rel_width.
inline Minimum golden_section_log(const std::function<double(double)>& f, double lo, double hi, double rel_width) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  const double tol = std::log1p(rel_width);
  for (int it = 0; it < 500 && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(std::exp(d));
    }
  }
  return fc <= fd ? Minimum{std::exp(c), fc} : Minimum{std::exp(d), fd};
}

/// Bisection for a sign change of g on [lo, hi] (g(lo) < 0 < g(hi)), in
/// log-coordinates, to relative width rel_width.
inline double bisect_log(const std::function<double(double)>& g, double lo, double hi, double rel_width,
                         std::size_t max_iter = 200) {
  double a = std::log(lo), b = std::log(hi);
  const double tol = std::log1p(rel_width);
  for (std::size_t it = 0; it < max_iter && (b - a) > tol; ++it) {
    const double mid = 0.5 * (a + b);
    if (g(std::exp(mid)) < 0.0)
      a = mid;
    else
      b = mid;
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace optreg
