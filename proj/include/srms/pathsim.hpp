#pragma once

// Finite-window simulation of (X_0, ..., X_m) from the thinned series
//
//   X_k = w_m^{p/α} Σ_{i_1<...<i_p≤L} Π_r ε_{i_r} Γ_{i_r}^{-1/α} 1{k ∈ R_{m,i_r}},
//
// truncated to the first L Poisson atoms. Each site value is the p-th
// elementary symmetric polynomial of the atoms covering it, accumulated with
// the one-pass recurrence while the hitting sets are drawn.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srms/errors.hpp"
#include "srms/parallel.hpp"
#include "srms/renewal.hpp"
#include "srms/rng.hpp"
#include "srms/theory.hpp"

namespace srms {

struct SeriesConfig {
  ModelParams params;
  std::int64_t window = 0;      // m; sites 0..m
  std::int64_t truncation = 0;  // L
  std::uint64_t seed = 0;

  void validate() const {
    params.validate();
    if (window < 0) throw DomainError("window must be non-negative");
    if (truncation < params.p) throw DomainError("truncation L must be at least p");
  }
};

struct SamplePath {
  std::vector<double> values;
  std::vector<std::int32_t> active_counts;
  double truncation_bound = 0.0;

  friend bool operator==(const SamplePath&, const SamplePath&) = default;
};

/// Γ_1 < ... < Γ_L, partial sums of standard exponentials.
inline std::vector<double> sample_gamma_arrivals(std::int64_t L, CounterRng& rng) {
  if (L < 1) throw DomainError("sample_gamma_arrivals: L must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(L));
  double g = 0.0;
  for (auto& x : out) x = g += rng.exponential();
  return out;
}

/// e_p(v) = Σ_{i_1<...<i_p} v_{i_1}⋯v_{i_p}; O(|v|·p).
inline double elementary_symmetric(std::span<const double> v, int p) {
  if (p < 0) throw DomainError("elementary_symmetric: p must be >= 0");
  std::vector<double> e(static_cast<std::size_t>(p) + 1, 0.0);
  e[0] = 1.0;
  for (const double x : v)
    for (int j = p; j >= 1; --j) e[static_cast<std::size_t>(j)] += e[static_cast<std::size_t>(j) - 1] * x;
  return e[static_cast<std::size_t>(p)];
}

/// round(w_m² / (m log^{1/(2−α)} m)), floored at p + 1.
inline std::int64_t default_truncation(const ModelParams& params, const InterRenewalLaw& law, std::int64_t m) {
  if (m < 2) throw DomainError("default_truncation: m must be >= 2");
  const double w = window_weight(law, m);
  const double md = static_cast<double>(m);
  const double L = w * w / (md * std::pow(std::log(md), 1.0 / (2.0 - params.alpha)));
  return std::max<std::int64_t>(params.p + 1, std::llround(L));
}

struct TruncationDiagnostic {
  double value = 0.0;
  /// False when p != 2: same shape, but no proof behind it.
  bool proven = true;
};

/// m · b_m^{-2} · w_m^{4/α−2} · L^{1−2/α}, constant dropped.
inline TruncationDiagnostic truncation_diagnostic(const SeriesConfig& config, const InterRenewalLaw& law) {
  const auto& a = config.params;
  if (config.window < 2) throw DomainError("truncation_diagnostic: window must be >= 2");
  const double m = static_cast<double>(config.window);
  const double b = normalizer_b(a, m);
  const double w = window_weight(law, config.window);
  const double v = m * std::pow(b, -2.0) * std::pow(w, 4.0 / a.alpha - 2.0) *
                   std::pow(static_cast<double>(config.truncation), 1.0 - 2.0 / a.alpha);
  return {v, a.p == 2};
}

/// Smallest L whose diagnostic is at most `target`, floored at p + 1.
inline std::int64_t truncation_for_target(const ModelParams& params, const InterRenewalLaw& law, std::int64_t m,
                                          double target) {
  if (!(target > 0.0)) throw DomainError("truncation target must be positive");
  SeriesConfig probe{params, m, 1, 0};
  const double at_one = truncation_diagnostic(probe, law).value;
  const double L = std::pow(at_one / target, 1.0 / (2.0 / params.alpha - 1.0));
  auto out = std::max<std::int64_t>(params.p + 1, static_cast<std::int64_t>(std::ceil(L)));
  // Guard against rounding at the boundary.
  while (truncation_diagnostic({params, m, out, 0}, law).value > target) ++out;
  return out;
}

/// round(c · w_m): about c atoms cover each site.
inline std::int64_t truncation_per_site(const ModelParams& params, const InterRenewalLaw& law, std::int64_t m,
                                        double c) {
  if (!(c > 0.0)) throw DomainError("truncation_per_site: c must be positive");
  return std::max<std::int64_t>(params.p + 1, std::llround(c * window_weight(law, m)));
}

/// Simulates replicates of one configuration. Replicate r draws from
/// CounterRng::stream_for(seed, r); per atom the order is E_i, ε_i, then R_{m,i}.
class PathSimulator {
 public:
  /// Reusable buffers; one per thread.
  struct Workspace {
    std::vector<double> e;  // per site, orders 1..p
    std::vector<double> values;
    std::vector<std::int32_t> counts;
  };

  PathSimulator(SeriesConfig config, InterRenewalLaw law)
      : config_(std::move(config)), sampler_(std::move(law), config_.window) {
    config_.validate();
    if (std::abs(config_.params.beta - sampler_.law().beta()) > 1e-15)
      throw DomainError("PathSimulator: law beta does not match model beta");
    log_weight_ = std::log(sampler_.weight());
    bound_ = config_.window >= 2 ? truncation_diagnostic(config_, sampler_.law()).value : std::nan("");
  }

  const SeriesConfig& config() const { return config_; }
  double window_weight() const { return sampler_.weight(); }
  double truncation_bound() const { return bound_; }

  /// Fills ws.values (X_0..X_m) and ws.counts (|S_k|) for one replicate.
  void run(std::uint64_t replicate, Workspace& ws) const {
    const int p = config_.params.p;
    const auto sites = static_cast<std::size_t>(config_.window) + 1;
    ws.e.assign(sites * static_cast<std::size_t>(p), 0.0);
    ws.counts.assign(sites, 0);
    ws.values.resize(sites);
    const double inv_alpha = 1.0 / config_.params.alpha;
    CounterRng rng = CounterRng::stream_for(config_.seed, replicate);
    double gamma = 0.0;
    for (std::int64_t i = 0; i < config_.truncation; ++i) {
      gamma += rng.exponential();
      const int sign = rng.rademacher();
      // w^{1/α} Γ^{-1/α} in log space; e_p is homogeneous of degree p, so
      // folding the window factor into every atom yields w^{p/α} e_p exactly.
      const double mag = std::exp((log_weight_ - std::log(gamma)) * inv_alpha);
      if (!std::isfinite(mag))
        throw OverflowError("atom magnitude overflows double (alpha too small for this window)");
      const double v = sign * mag;
      sampler_.visit(rng, [&](std::int64_t k) {
        double* e = ws.e.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(p);
        for (int j = p - 1; j >= 1; --j) e[j] += e[j - 1] * v;
        e[0] += v;
        ++ws.counts[static_cast<std::size_t>(k)];
      });
    }
    for (std::size_t k = 0; k < sites; ++k) {
      const double x = ws.e[k * static_cast<std::size_t>(p) + static_cast<std::size_t>(p - 1)];
      if (!std::isfinite(x)) throw OverflowError("site value overflows double");
      ws.values[k] = x;
    }
  }

  SamplePath simulate(std::uint64_t replicate) const {
    Workspace ws;
    run(replicate, ws);
    return {std::move(ws.values), std::move(ws.counts), bound_};
  }

 private:
  SeriesConfig config_;
  WindowSampler sampler_;
  double log_weight_ = 0.0;
  double bound_ = 0.0;
};

inline SamplePath simulate_path(const SeriesConfig& config, const InterRenewalLaw& law,
                                std::uint64_t replicate = 0) {
  return PathSimulator(config, law).simulate(replicate);
}

/// Replicates 0..R−1, independent of thread count and scheduling.
inline std::vector<SamplePath> simulate_ensemble(const SeriesConfig& config, const InterRenewalLaw& law,
                                                 std::int64_t replicates) {
  if (replicates < 1) throw DomainError("simulate_ensemble: need at least one replicate");
  const PathSimulator sim(config, law);
  std::vector<SamplePath> out(static_cast<std::size_t>(replicates));
  parallel_for(replicates, [&](std::int64_t r) { out[static_cast<std::size_t>(r)] = sim.simulate(r); }, 16);
  return out;
}

/// Calls fn(state, r, values, counts) for every replicate with per-worker state;
/// see parallel_accumulate for the merge contract.
template <class MakeState, class Fn>
auto for_each_replicate(const PathSimulator& sim, std::int64_t replicates, MakeState&& make_state, Fn&& fn) {
  struct Slot {
    decltype(make_state()) state;
    PathSimulator::Workspace ws;
  };
  auto slots = parallel_accumulate(
      replicates, [&] { return Slot{make_state(), {}}; },
      [&](Slot& slot, std::int64_t r) {
        sim.run(static_cast<std::uint64_t>(r), slot.ws);
        fn(slot.state, r, std::span<const double>(slot.ws.values),
           std::span<const std::int32_t>(slot.ws.counts));
      },
      16);
  std::vector<decltype(make_state())> states;
  states.reserve(slots.size());
  for (auto& s : slots) states.push_back(std::move(s.state));
  return states;
}

}  // namespace srms
