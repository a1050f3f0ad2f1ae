#pragma once

// Small empirical-statistics helpers shared by the estimators and tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "srms/errors.hpp"

namespace srms {

/// Inverse of the empirical cdf: the ceil(q·n)-th order statistic.
inline double quantile_type1(std::span<const double> sample, double q) {
  if (sample.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0,1]");
  std::vector<double> v(sample.begin(), sample.end());
  const auto n = static_cast<std::int64_t>(v.size());
  const std::int64_t idx = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(q * n)) - 1, 0, n - 1);
  std::nth_element(v.begin(), v.begin() + idx, v.end());
  return v[static_cast<std::size_t>(idx)];
}

inline double binomial_sigma(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a − F_b|.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientDataError("KS statistic needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample KS critical value, c(0.01) = 1.628.
inline double ks_critical_1pct(std::size_t na, std::size_t nb) {
  const double a = static_cast<double>(na), b = static_cast<double>(nb);
  return 1.628 * std::sqrt((a + b) / (a * b));
}

/// Least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientDataError("regression needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace srms
