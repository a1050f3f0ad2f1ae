#pragma once

// Discrete renewal processes with regularly varying inter-renewal tails.
//
// A law F on {1, 2, ...} is described by its survival function
// F̄(k) = P(gap > k), k >= 0, with F̄(0) = 1 and F̄(k) ~ C_F k^-β, β in (0,1).
// The stationary delay measure is π(k) = F̄(k) (normalizing constant 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srms/errors.hpp"
#include "srms/rng.hpp"
#include "srms/special.hpp"

namespace srms {

/// Interface for a concrete inter-renewal distribution family.
class InterRenewalFamily {
 public:
  virtual ~InterRenewalFamily() = default;

  virtual std::string name() const = 0;
  virtual std::string describe() const = 0;
  virtual double beta() const = 0;
  virtual double tail_constant() const = 0;
  virtual double survival(std::int64_t k) const = 0;
  /// Must be accurate in relative terms for large n (no F̄(n-1) - F̄(n) cancellation).
  virtual double pmf(std::int64_t n) const = 0;
  /// Upper bound for sup_n n f(n) / F̄(n).
  virtual double doney_bound() const = 0;
  /// Smallest n >= 1 with F̄(n) < u for u in (0, 1], when a closed form exists.
  /// The result is returned as a double because it can exceed any integer type.
  virtual std::optional<double> gap_for_uniform(double /*u*/) const { return std::nullopt; }
};

/// F̄(k) = (k+1)^-β. C_F = 1, n f(n)/F̄(n) increases to β.
class ShiftedParetoFamily final : public InterRenewalFamily {
 public:
  explicit ShiftedParetoFamily(double beta) : beta_(beta) {}

  std::string name() const override { return "shifted-pareto"; }
  std::string describe() const override { return "survival(k) = (k+1)^-beta"; }
  double beta() const override { return beta_; }
  double tail_constant() const override { return 1.0; }
  double survival(std::int64_t k) const override {
    return std::pow(static_cast<double>(k) + 1.0, -beta_);
  }
  double pmf(std::int64_t n) const override {
    const double x = static_cast<double>(n);
    return std::pow(x, -beta_) * -std::expm1(-beta_ * std::log1p(1.0 / x));
  }
  double doney_bound() const override { return beta_; }
  std::optional<double> gap_for_uniform(double u) const override {
    return std::floor(std::exp(-std::log(u) / beta_));
  }

 private:
  double beta_;
};

/// F̄(k) = (1 + k/s)^-β. C_F = s^β. Sampled through the survival table.
class LomaxFamily final : public InterRenewalFamily {
 public:
  LomaxFamily(double beta, double scale) : beta_(beta), scale_(scale) {}

  std::string name() const override { return "lomax"; }
  std::string describe() const override {
    return "survival(k) = (1 + k/" + std::to_string(scale_) + ")^-beta";
  }
  double beta() const override { return beta_; }
  double tail_constant() const override { return std::pow(scale_, beta_); }
  double survival(std::int64_t k) const override {
    return std::pow(1.0 + static_cast<double>(k) / scale_, -beta_);
  }
  double pmf(std::int64_t n) const override {
    const double a = scale_ + static_cast<double>(n) - 1.0;
    return std::pow(a / scale_, -beta_) * -std::expm1(-beta_ * std::log1p(1.0 / a));
  }
  double doney_bound() const override { return beta_ * std::max(1.0, 1.0 / scale_); }

 private:
  double beta_;
  double scale_;
};

/// Immutable handle on an inter-renewal law plus the sampling tables it needs.
/// Copies share the family; all members are safe for concurrent use.
class InterRenewalLaw {
 public:
  static constexpr std::int64_t kDefaultTableHorizon = std::int64_t{1} << 16;

  explicit InterRenewalLaw(std::shared_ptr<const InterRenewalFamily> family,
                           std::int64_t table_horizon = kDefaultTableHorizon)
      : family_(std::move(family)) {
    if (!family_) throw std::invalid_argument("InterRenewalLaw: null family");
    if (table_horizon < 1) throw std::invalid_argument("InterRenewalLaw: table horizon must be >= 1");
    const double b = family_->beta();
    if (!(b > 0.0 && b < 1.0)) throw DomainError("InterRenewalLaw: beta must lie in (0,1)");
    if (family_->survival(0) != 1.0) throw DomainError("InterRenewalLaw: survival(0) must be 1");
    if (!family_->gap_for_uniform(1.0)) {
      survival_table_.resize(static_cast<std::size_t>(table_horizon) + 1);
      for (std::int64_t k = 0; k <= table_horizon; ++k)
        survival_table_[static_cast<std::size_t>(k)] = family_->survival(k);
    }
  }

  static InterRenewalLaw shifted_pareto(double beta) {
    return InterRenewalLaw(std::make_shared<ShiftedParetoFamily>(beta));
  }
  static InterRenewalLaw lomax(double beta, double scale) {
    if (!(scale > 0.0)) throw DomainError("lomax: scale must be positive");
    return InterRenewalLaw(std::make_shared<LomaxFamily>(beta, scale));
  }

  double beta() const { return family_->beta(); }
  double tail_constant() const { return family_->tail_constant(); }
  std::string family() const { return family_->name(); }
  std::string describe() const { return family_->describe(); }
  double doney_bound() const { return family_->doney_bound(); }

  double survival(std::int64_t k) const {
    if (k < 0) throw DomainError("survival: lag must be non-negative");
    return family_->survival(k);
  }

  double pmf(std::int64_t n) const {
    if (n < 1) throw DomainError("pmf: inter-arrival times are >= 1");
    return family_->pmf(n);
  }

  /// Inverse-cdf gap for u in (0,1], capped: returns cap + 1 whenever the gap exceeds cap.
  std::int64_t gap_for_uniform(double u, std::int64_t cap) const {
    if (auto g = family_->gap_for_uniform(u)) {
      return *g > static_cast<double>(cap) ? cap + 1 : static_cast<std::int64_t>(*g);
    }
    const auto horizon = static_cast<std::int64_t>(survival_table_.size()) - 1;
    if (survival_table_.back() < u) {
      // first n in [1, horizon] with F̄(n) < u
      auto it = std::upper_bound(survival_table_.begin() + 1, survival_table_.end(), u,
                                 std::greater<>());
      const auto n = static_cast<std::int64_t>(it - survival_table_.begin());
      return n > cap ? cap + 1 : n;
    }
    if (cap <= horizon) return cap + 1;
    // Beyond the table: galloping search on the closed-form survival.
    std::int64_t lo = horizon;  // F̄(lo) >= u
    std::int64_t hi = horizon;
    do {
      lo = hi;
      if (hi > cap) return cap + 1;
      hi = hi > cap / 2 ? cap + 1 : hi * 2;
    } while (family_->survival(hi) >= u);
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (family_->survival(mid) >= u ? lo : hi) = mid;
    }
    return hi > cap ? cap + 1 : hi;
  }

  std::int64_t sample_gap(CounterRng& rng, std::int64_t cap) const {
    return gap_for_uniform(rng.uniform_pos(), cap);
  }

 private:
  std::shared_ptr<const InterRenewalFamily> family_;
  std::vector<double> survival_table_;
};

/// Renewal points restricted to {0, ..., window_end}; sorted and unique.
struct RenewalPath {
  std::vector<std::int64_t> points;
  std::int64_t window_end = 0;

  bool contains(std::int64_t k) const { return std::binary_search(points.begin(), points.end(), k); }
  friend bool operator==(const RenewalPath&, const RenewalPath&) = default;
};

/// One draw of the window-conditioned random set R_m.
using WindowHittingSet = RenewalPath;

inline double survival(const InterRenewalLaw& law, std::int64_t k) { return law.survival(k); }
inline double pmf(const InterRenewalLaw& law, std::int64_t n) { return law.pmf(n); }

/// u(0..kmax) by the plain convolution recursion u(k) = Σ_{j=1..k} f(j) u(k-j).
/// O(kmax^2); this is the reference evaluation.
inline std::vector<double> renewal_mass(const InterRenewalLaw& law, std::int64_t kmax) {
  if (kmax < 0) throw DomainError("renewal_mass: kmax must be non-negative");
  const auto n = static_cast<std::size_t>(kmax) + 1;
  std::vector<double> f(n, 0.0), u(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) f[j] = law.pmf(static_cast<std::int64_t>(j));
  u[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += f[j] * u[k - j];
    u[k] = s;
  }
  return u;
}

/// Same recursion evaluated in cache-sized output blocks so that kmax ~ 1e6 is
/// practical. Extendable in place; agrees with renewal_mass up to summation order.
class RenewalMassTable {
 public:
  explicit RenewalMassTable(InterRenewalLaw law) : law_(std::move(law)) {}

  std::span<const double> values() const { return u_; }
  std::int64_t size() const { return static_cast<std::int64_t>(u_.size()); }
  double operator[](std::int64_t k) const { return u_[static_cast<std::size_t>(k)]; }

  void extend_to(std::int64_t kmax) {
    if (kmax < size()) return;
    grow_pmf(kmax + kBlock + 1);
    if (u_.empty()) u_.push_back(1.0);
    const std::int64_t first = size();
    u_.resize(static_cast<std::size_t>(kmax) + 1);
    const double* f = f_.data();
    double* u = u_.data();
    for (std::int64_t k0 = first; k0 <= kmax; k0 += kBlock) {
      const std::int64_t nb = std::min<std::int64_t>(kBlock, kmax + 1 - k0);
      alignas(64) double acc[kBlock];
      prefix_block(f, u, k0, acc);
      // Triangular part inside the block.
      for (std::int64_t t = 0; t < nb; ++t) {
        const std::int64_t k = k0 + t;
        double s = acc[t];
        for (std::int64_t j = k0; j < k; ++j) s += f[k - j] * u[j];
        u[k] = s;
      }
    }
  }

 private:
  // Eight 8-wide accumulators: enough independent FMA chains to hide latency.
  using Lane = double __attribute__((vector_size(64)));
  static constexpr int kLanes = 8;
  static constexpr int kBlock = kLanes * static_cast<int>(sizeof(Lane) / sizeof(double));

  // out[t] = Σ_{j<k0} f[k0+t-j] u[j] for t < kBlock.
  static void prefix_block(const double* __restrict f, const double* __restrict u,
                           std::int64_t k0, double* __restrict out) {
    constexpr int w = static_cast<int>(sizeof(Lane) / sizeof(double));
    Lane acc[kLanes] = {};
    for (std::int64_t j = 0; j < k0; ++j) {
      const double uj = u[j];
      const double* fj = f + (k0 - j);
      for (int v = 0; v < kLanes; ++v) {
        Lane x;
        std::memcpy(&x, fj + v * w, sizeof x);
        acc[v] += x * uj;
      }
    }
    std::memcpy(out, acc, sizeof acc);
  }

  void grow_pmf(std::int64_t n) {
    const std::int64_t have = static_cast<std::int64_t>(f_.size());
    if (n <= have) return;
    f_.resize(static_cast<std::size_t>(n));
    if (have == 0) f_[0] = 0.0;
    for (std::int64_t j = std::max<std::int64_t>(have, 1); j < n; ++j)
      f_[static_cast<std::size_t>(j)] = law_.pmf(j);
  }

  InterRenewalLaw law_;
  std::vector<double> f_;
  std::vector<double> u_;
};

inline std::vector<double> renewal_mass_blocked(const InterRenewalLaw& law, std::int64_t kmax) {
  if (kmax < 0) throw DomainError("renewal_mass: kmax must be non-negative");
  RenewalMassTable table(law);
  table.extend_to(kmax);
  return {table.values().begin(), table.values().end()};
}

/// k^(β-1) / (C_F Γ(β) Γ(1-β)).
inline double renewal_mass_asymptote(const InterRenewalLaw& law, double k) {
  if (!(k >= 1.0)) throw DomainError("renewal_mass_asymptote: k must be >= 1");
  const double b = law.beta();
  return std::pow(k, b - 1.0) / (law.tail_constant() * gamma_reflection_product(b));
}

/// w_m = Σ_{k=0..m} F̄(k), summed smallest-first.
inline double window_weight(const InterRenewalLaw& law, std::int64_t m) {
  if (m < 0) throw DomainError("window_weight: m must be non-negative");
  double s = 0.0;
  for (std::int64_t k = m; k >= 0; --k) s += law.survival(k);
  return s;
}

/// Renewal process started at `delay`, kept on {0, ..., window_end}.
inline RenewalPath sample_renewal_path(const InterRenewalLaw& law, std::int64_t delay,
                                       std::int64_t window_end, CounterRng& rng) {
  if (delay < 0) throw DomainError("sample_renewal_path: delay must be non-negative");
  if (window_end < 0) throw DomainError("sample_renewal_path: window_end must be non-negative");
  RenewalPath path;
  path.window_end = window_end;
  for (std::int64_t t = delay; t <= window_end;) {
    path.points.push_back(t);
    t += law.sample_gap(rng, window_end - t);
  }
  return path;
}

/// Sampler for R_m: delay d with P(d = k) = F̄(k)/w_m on {0..m}, then the
/// renewal runs forward inside the window. Construct once per (law, m).
class WindowSampler {
 public:
  WindowSampler(InterRenewalLaw law, std::int64_t m) : law_(std::move(law)), m_(m) {
    if (m < 0) throw DomainError("WindowSampler: m must be non-negative");
    cumulative_.resize(static_cast<std::size_t>(m) + 1);
    double s = 0.0;
    for (std::int64_t k = 0; k <= m; ++k) {
      s += law_.survival(k);
      cumulative_[static_cast<std::size_t>(k)] = s;
    }
  }

  std::int64_t window_end() const { return m_; }
  double weight() const { return cumulative_.back(); }
  const InterRenewalLaw& law() const { return law_; }

  std::int64_t sample_delay(CounterRng& rng) const {
    const double target = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    return std::min<std::int64_t>(it - cumulative_.begin(), m_);
  }

  /// Calls visit(k) for each point of one draw of R_m, in increasing order.
  template <class Visit>
  void visit(CounterRng& rng, Visit&& visit) const {
    for (std::int64_t t = sample_delay(rng); t <= m_;) {
      visit(t);
      t += law_.sample_gap(rng, m_ - t);
    }
  }

  WindowHittingSet sample(CounterRng& rng) const {
    WindowHittingSet set;
    set.window_end = m_;
    visit(rng, [&](std::int64_t k) { set.points.push_back(k); });
    return set;
  }

 private:
  InterRenewalLaw law_;
  std::int64_t m_;
  std::vector<double> cumulative_;
};

inline WindowHittingSet sample_window_hitting_set(const InterRenewalLaw& law, std::int64_t m,
                                                  CounterRng& rng) {
  return WindowSampler(law, m).sample(rng);
}

inline RenewalPath intersect_paths(std::span<const RenewalPath> paths) {
  if (paths.empty()) throw std::invalid_argument("intersect_paths: no paths");
  RenewalPath out = paths.front();
  for (const auto& path : paths.subspan(1)) {
    if (path.window_end != out.window_end)
      throw std::invalid_argument("intersect_paths: window mismatch");
    std::vector<std::int64_t> next;
    std::set_intersection(out.points.begin(), out.points.end(), path.points.begin(),
                          path.points.end(), std::back_inserter(next));
    out.points = std::move(next);
  }
  return out;
}

/// η ∩ {0..horizon} for η the intersection of p independent non-delayed renewals.
inline RenewalPath sample_intersection(const InterRenewalLaw& law, int p, std::int64_t horizon,
                                       CounterRng& rng) {
  if (p < 1) throw DomainError("sample_intersection: p must be >= 1");
  std::vector<RenewalPath> paths;
  paths.reserve(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) paths.push_back(sample_renewal_path(law, 0, horizon, rng));
  return intersect_paths(paths);
}

}  // namespace srms
