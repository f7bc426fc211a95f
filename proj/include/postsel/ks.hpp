#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace postsel {

// Two-sided Kolmogorov-Smirnov distance between the empirical distribution
// of sorted samples and model cdf values at those samples.
inline double ks_statistic(std::span<const double> sorted_cdf_values) {
  const std::size_t n = sorted_cdf_values.size();
  if (n == 0) throw std::invalid_argument("ks_statistic needs samples");
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = sorted_cdf_values[i];
    d = std::max(d, std::max(static_cast<double>(i + 1) / dn - f, f - static_cast<double>(i) / dn));
  }
  return d;
}

// Asymptotic KS critical value at the 0.001 level.
inline double ks_critical_001(std::size_t n) { return 1.95 / std::sqrt(static_cast<double>(n)); }

}  // namespace postsel
