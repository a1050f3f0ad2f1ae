#pragma once

// Closed-form constants of the stable-regenerative multiple-stable model:
// regime classification, the shape constant D, candidate and actual extremal
// indices, normalizing sequences and tail asymptotes.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "srms/errors.hpp"
#include "srms/renewal.hpp"
#include "srms/special.hpp"

namespace srms {

/// β as an exact reduced fraction num/den, 0 < num < den.
struct BetaRatio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  friend bool operator==(const BetaRatio&, const BetaRatio&) = default;
};

namespace detail {

inline std::optional<std::int64_t> parse_digits(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

inline std::optional<BetaRatio> reduced(std::int64_t num, std::int64_t den) {
  if (den <= 0) return std::nullopt;
  const std::int64_t g = std::gcd(num, den);
  return BetaRatio{num / g, den / g};
}

}  // namespace detail

/// Exact reading of "a/b" or a plain decimal "0.25"; nullopt for anything else
/// (exponents, signs, too many digits).
inline std::optional<BetaRatio> parse_beta_ratio(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = detail::parse_digits(text.substr(0, slash));
    const auto den = detail::parse_digits(text.substr(slash + 1));
    if (!num || !den) return std::nullopt;
    return detail::reduced(*num, *den);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (frac.size() > 17) return std::nullopt;
  const auto w = whole.empty() ? std::optional<std::int64_t>(0) : detail::parse_digits(whole);
  const auto f = frac.empty() ? std::optional<std::int64_t>(0) : detail::parse_digits(frac);
  if (!w || !f || (whole.empty() && frac.empty())) return std::nullopt;
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  if (*w > 0) return std::nullopt;  // β < 1 always
  return detail::reduced(*f, scale);
}

/// The triple (α, β, p). When β was given exactly, regime tests use integers.
struct ModelParams {
  double alpha = 1.0;
  double beta = 0.25;
  int p = 2;
  std::optional<BetaRatio> beta_exact;

  ModelParams() = default;
  ModelParams(double alpha_, double beta_, int p_) : alpha(alpha_), beta(beta_), p(p_) { validate(); }
  ModelParams(double alpha_, BetaRatio beta_, int p_)
      : alpha(alpha_), beta(beta_.value()), p(p_), beta_exact(beta_) {
    validate();
  }

  /// β from text: exact when it parses as a fraction or decimal.
  static ModelParams parse(double alpha, std::string_view beta_text, int p) {
    if (auto r = parse_beta_ratio(beta_text)) return ModelParams(alpha, *r, p);
    double b = 0.0;
    const auto [ptr, ec] = std::from_chars(beta_text.data(), beta_text.data() + beta_text.size(), b);
    if (ec != std::errc{} || ptr != beta_text.data() + beta_text.size())
      throw DomainError("beta: cannot parse '" + std::string(beta_text) + "'");
    return ModelParams(alpha, b, p);
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0,2)");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
    if (beta_exact && !(beta_exact->num > 0 && beta_exact->num < beta_exact->den))
      throw DomainError("beta must lie in (0,1)");
    if (p < 1) throw DomainError("p must be a positive integer");
  }

  std::string beta_text() const {
    if (beta_exact) return beta_exact->str();
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, beta);
    return std::string(buf, r.ptr);
  }
};

/// β_q = qβ − q + 1.
inline double beta_q(double beta, int q) { return q * beta - q + 1.0; }

enum class Regime { SuperCritical, Critical, SubCritical };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::SuperCritical: return "super-critical";
    case Regime::Critical: return "critical";
    case Regime::SubCritical: return "sub-critical";
  }
  return "unknown";
}

struct RegimeReport {
  double beta_p = 0.0;
  Regime regime = Regime::SuperCritical;
  /// min{q : β_q < 0}; always exists for β < 1.
  std::optional<int> q_beta_p;
};

inline RegimeReport classify_regime(const ModelParams& params) {
  params.validate();
  RegimeReport report;
  report.beta_p = beta_q(params.beta, params.p);
  if (const auto& r = params.beta_exact) {
    // sign(β_p) = sign(p·num − p·den + den); min q with q(den − num) > den.
    const std::int64_t scaled = params.p * r->num - params.p * r->den + r->den;
    report.beta_p = static_cast<double>(scaled) / static_cast<double>(r->den);
    report.regime = scaled < 0 ? Regime::SubCritical : scaled == 0 ? Regime::Critical : Regime::SuperCritical;
    report.q_beta_p = static_cast<int>(r->den / (r->den - r->num) + 1);
  } else {
    report.regime = report.beta_p < 0.0    ? Regime::SubCritical
                    : report.beta_p == 0.0 ? Regime::Critical
                                           : Regime::SuperCritical;
    int q = static_cast<int>(std::floor(1.0 / (1.0 - params.beta)));
    while (q > 1 && beta_q(params.beta, q - 1) < 0.0) --q;
    while (!(beta_q(params.beta, q) < 0.0)) ++q;
    report.q_beta_p = q;
  }
  return report;
}

namespace detail {

inline long double irwin_hall_density_ld(int p, long double x) {
  if (!(x > 0.0L && x < p)) return (p == 1 && x == 0.0L) ? 1.0L : 0.0L;
  long double sum = 0.0L;
  for (int s = 0; s <= p && s < x; ++s) {
    const long double term = binomial(p, s) * std::pow(x - s, p - 1);
    sum += (s % 2 == 0) ? term : -term;
  }
  return sum / factorial(p - 1);
}

}  // namespace detail

/// Density of the sum of p independent U(0,1) variables:
/// (1/(p−1)!) Σ_{s<x} (−1)^s C(p,s) (x − s)^{p−1}.
inline double irwin_hall_density(int p, double x) {
  if (p < 1) throw DomainError("irwin_hall_density: p must be >= 1");
  return static_cast<double>(detail::irwin_hall_density_ld(p, x));
}

namespace detail {

inline void require_subcritical(double beta, int p, const char* where) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError(std::string(where) + ": beta must lie in (0,1)");
  if (p < 1) throw DomainError(std::string(where) + ": p must be >= 1");
  if (!(beta_q(beta, p) < 0.0))
    throw DomainError(std::string(where) + ": defined only for the sub-critical regime");
}

}  // namespace detail

/// D as the alternating sum Σ_{s=q}^{p} C(p,s) (−1)^{p−s} (−β_s)^{p−1}.
inline double shape_D_alternating(double beta, int p) {
  detail::require_subcritical(beta, p, "shape_D");
  const int q = *classify_regime(ModelParams(1.0, beta, p)).q_beta_p;
  long double sum = 0.0L;
  for (int s = q; s <= p; ++s) {
    const long double bs = static_cast<long double>(s) * beta - s + 1.0L;
    const long double term = binomial(p, s) * std::pow(-bs, p - 1);
    sum += ((p - s) % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

/// D = (p−1)! (1−β)^{p−1} f_p(1/(1−β)), with f_p the Irwin–Hall density.
inline double shape_D_irwin_hall(double beta, int p) {
  detail::require_subcritical(beta, p, "shape_D");
  const long double gap = 1.0L - beta;
  return static_cast<double>(factorial(p - 1) * std::pow(gap, p - 1) *
                             detail::irwin_hall_density_ld(p, 1.0L / gap));
}

/// Shape constant D_{β,p} ∈ (0,1). Both representations are evaluated and
/// must agree; a mismatch is an internal error.
inline double shape_D(double beta, int p) {
  const double a = shape_D_alternating(beta, p);
  const double b = shape_D_irwin_hall(beta, p);
  if (std::abs(a - b) > 1e-12) throw std::logic_error("shape_D: representations disagree");
  return a;
}

/// Bracket for (Σ_{n≥0} u(n)^p)^{-1}.
struct CandidateIndex {
  double lower = 0.0;
  double upper = 1.0;
  /// Number of exact terms summed (N + 1).
  std::int64_t terms = 0;
  bool reached_tolerance = false;

  double value() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

struct CandidateOptions {
  double tol = 1e-4;
  std::int64_t n_start = std::int64_t{1} << 12;
  std::int64_t n_max = std::int64_t{1} << 20;
};

/// Partial sums of u(n)^p on a doubling grid of N, with the remainder bounded by
/// c_N Σ_{n>N} n^{p(β−1)} ≤ c_N N^{β_p}/(−β_p). c_N is the largest value of
/// (u(n) n^{1−β})^p on (N/2, N], raised to the limiting constant if that is larger.
/// Stops at the first N with width ≤ tol, or at n_max with reached_tolerance = false.
inline CandidateIndex candidate_extremal_index(const InterRenewalLaw& law, int p,
                                               const CandidateOptions& options = {}) {
  const double beta = law.beta();
  if (p < 1) throw DomainError("candidate_extremal_index: p must be >= 1");
  const double bp = beta_q(beta, p);
  if (!(bp < 0.0))
    throw NonConvergenceError("candidate_extremal_index: Σ u(n)^p diverges unless p·β − p + 1 < 0");
  if (!(options.tol > 0.0)) throw DomainError("candidate_extremal_index: tol must be positive");
  if (options.n_start < 2 || options.n_max < options.n_start)
    throw DomainError("candidate_extremal_index: need 2 <= n_start <= n_max");

  const double limit_constant = 1.0 / (law.tail_constant() * gamma_reflection_product(beta));
  RenewalMassTable table(law);
  long double partial = 0.0L;
  std::int64_t summed = 0;  // terms u(0..summed-1) are in `partial`
  CandidateIndex out;
  for (std::int64_t n = options.n_start;; n = std::min(2 * n, options.n_max)) {
    table.extend_to(n);
    for (; summed <= n; ++summed) partial += std::pow(static_cast<long double>(table[summed]), p);
    double c = limit_constant;
    for (std::int64_t k = n / 2 + 1; k <= n; ++k)
      c = std::max(c, table[k] * std::pow(static_cast<double>(k), 1.0 - beta));
    const long double tail = std::pow(static_cast<long double>(c), p) *
                             std::pow(static_cast<long double>(n), bp) / -bp;
    out.upper = static_cast<double>(1.0L / partial);
    out.lower = static_cast<double>(1.0L / (partial + tail));
    out.terms = summed;
    out.reached_tolerance = out.width() <= options.tol;
    if (out.reached_tolerance || n >= options.n_max) return out;
  }
}

struct ExtremalConstants {
  Regime regime = Regime::SuperCritical;
  std::optional<CandidateIndex> q_Fp;
  /// Only in the sub-critical regime.
  std::optional<double> D;
  double theta = 0.0;
  double vartheta = 0.0;
};

/// θ = D·𝔮 and ϑ = 𝔮 when sub-critical; both 0 otherwise.
inline ExtremalConstants extremal_index(const ModelParams& params, const InterRenewalLaw& law,
                                        const CandidateOptions& options = {}) {
  if (std::abs(params.beta - law.beta()) > 1e-15)
    throw DomainError("extremal_index: law beta does not match model beta");
  ExtremalConstants out;
  out.regime = classify_regime(params).regime;
  if (out.regime != Regime::SubCritical) return out;
  out.q_Fp = candidate_extremal_index(law, params.p, options);
  out.D = shape_D(params.beta, params.p);
  out.vartheta = out.q_Fp->value();
  out.theta = *out.D * out.vartheta;
  return out;
}

/// b_n = (½ n log^{p−1} n / (p!(p−1)!))^{1/α}, adopted as an exact definition.
inline double normalizer_b(const ModelParams& params, double n) {
  if (!(n >= 2.0)) throw DomainError("normalizer_b: n must be >= 2");
  const double base = 0.5 * n * std::pow(std::log(n), params.p - 1) /
                      (factorial(params.p) * factorial(params.p - 1));
  return std::pow(base, 1.0 / params.alpha);
}

/// (n (log log n)^{p−1} / log n)^{1/α}, without the regime check. Defined for n > e.
inline double critical_normalizer_formula(double alpha, int p, double n) {
  if (!(n > std::numbers::e)) throw DomainError("critical normalizer: n must exceed e");
  const double l = std::log(n);
  return std::pow(n * std::pow(std::log(l), p - 1) / l, 1.0 / alpha);
}

/// Critical-regime normalizer b̃_n; domain error off the critical regime.
inline double normalizer_b_critical(const ModelParams& params, double n) {
  if (classify_regime(params).regime != Regime::Critical)
    throw DomainError("normalizer_b_critical: requires p·β − p + 1 = 0");
  if (!(n >= 16.0)) throw DomainError("normalizer_b_critical: n must be >= 16");
  return critical_normalizer_formula(params.alpha, params.p, n);
}

/// Asymptote of P(1/(Γ_1⋯Γ_p) > x): x^{-1} log^{p−1} x / (p!(p−1)!).
inline double product_gamma_tail_asymptote(int p, double x) {
  if (p < 1) throw DomainError("product_gamma_tail_asymptote: p must be >= 1");
  if (!(x > 1.0)) throw DomainError("product_gamma_tail_asymptote: x must exceed 1");
  return std::pow(std::log(x), p - 1) / (x * factorial(p) * factorial(p - 1));
}

/// Asymptote of P(|X_k| > x): α^{p−1} x^{−α} log^{p−1} x / (p!(p−1)!).
inline double marginal_tail_asymptote(const ModelParams& params, double x) {
  if (!(x > 1.0)) throw DomainError("marginal_tail_asymptote: x must exceed 1");
  const int p = params.p;
  return std::pow(params.alpha, p - 1) * std::pow(x, -params.alpha) * std::pow(std::log(x), p - 1) /
         (factorial(p) * factorial(p - 1));
}

/// Asymptote of F̄_p(n) = P(η_1 > n), η the intersection of p independent renewals.
/// Sub-critical: the limit 𝔮 (midpoint of its bracket).
inline double intersected_tail_asymptote(const InterRenewalLaw& law, int p, double n,
                                         const CandidateOptions& options = {}) {
  if (p < 1) throw DomainError("intersected_tail_asymptote: p must be >= 1");
  if (!(n >= 2.0)) throw DomainError("intersected_tail_asymptote: n must be >= 2");
  const double beta = law.beta();
  const double bp = beta_q(beta, p);
  const double k = std::pow(law.tail_constant() * gamma_reflection_product(beta), p);
  if (bp > 0.0) return std::pow(n, -bp) * k / gamma_reflection_product(bp);
  if (bp == 0.0) return k / std::log(n);
  return candidate_extremal_index(law, p, options).value();
}

}  // namespace srms
