#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "optreg/core/error.hpp"

namespace optreg {

/// Box-plot summary plus mean and sample standard deviation.
struct BoxStats {
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  double whisker_lo = 0.0, whisker_hi = 0.0;
  std::vector<double> outliers;
  double mean = 0.0, std = 0.0;
  std::size_t count = 0;
};

/// Quantile by linear interpolation between order statistics (h = (n−1)q).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline BoxStats summary_stats(std::span<const double> values) {
  require(!values.empty(), ErrorKind::InvalidArgument, "summary_stats needs at least one value");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxStats s;
  s.count = v.size();
  s.median = quantile_sorted(v, 0.5);
  s.q25 = quantile_sorted(v, 0.25);
  s.q75 = quantile_sorted(v, 0.75);
  const double iqr = s.q75 - s.q25;
  const double lo_fence = s.q25 - 1.5 * iqr, hi_fence = s.q75 + 1.5 * iqr;
  s.whisker_lo = s.q25;
  s.whisker_hi = s.q75;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      s.outliers.push_back(x);
      continue;
    }
    s.whisker_lo = std::min(s.whisker_lo, x);
    s.whisker_hi = std::max(s.whisker_hi, x);
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace optreg
