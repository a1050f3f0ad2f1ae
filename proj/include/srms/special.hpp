#pragma once

#include <cmath>
#include <cstdint>

namespace srms {

// std::tgamma (glibc) is accurate to a few ulp on (0, 2), well inside the
// 1e-12 relative accuracy the asymptotic constants need.
inline double gamma_fn(double x) { return std::tgamma(x); }

/// Γ(β)Γ(1−β) = π / sin(πβ); computed through tgamma so both routes stay testable.
inline double gamma_reflection_product(double beta) { return gamma_fn(beta) * gamma_fn(1.0 - beta); }

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = k < n - k ? k : n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace srms
