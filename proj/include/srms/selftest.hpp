#pragma once

// Property checks that need no reference numbers: algebraic identities,
// determinism, symmetry, stationarity and serialization round trips.
// `scale` multiplies every Monte Carlo sample size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srms/experiments.hpp"
#include "srms/extremes.hpp"
#include "srms/manifest.hpp"
#include "srms/pathsim.hpp"
#include "srms/renewal.hpp"
#include "srms/stats.hpp"
#include "srms/theory.hpp"

namespace srms {

struct CheckResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

namespace selftest {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline CheckResult shape_constant_grid() {
  double worst = 0.0;
  bool in_range = true;
  for (int p = 2; p <= 6; ++p)
    for (int i = 1; i <= 12; ++i) {
      const double beta = i <= 9 ? 0.05 * i : (i == 10 ? 0.55 : 0.6);
      if (!(beta_q(beta, p) < 0.0)) continue;
      const double a = shape_D_alternating(beta, p), b = shape_D_irwin_hall(beta, p);
      worst = std::max(worst, std::abs(a - b));
      if (beta < 0.5) worst = std::max(worst, std::abs(a - (1.0 - p * std::pow(beta, p - 1))));
      in_range = in_range && a > 0.0 && a < 1.0;
    }
  return {"shape_D routes agree", worst <= 1e-12 && in_range, "max deviation " + fmt(worst)};
}

inline CheckResult elementary_symmetric_bruteforce() {
  CounterRng rng(0xE5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.below(9));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = (rng.uniform() - 0.5) * std::exp(6.0 * (rng.uniform() - 0.5));
    for (int p = 0; p <= 4; ++p) {
      double brute = 0.0, scale = 0.0;
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != p) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
          if (mask >> i & 1u) prod *= v[static_cast<std::size_t>(i)];
        brute += prod;
        scale += std::abs(prod);
      }
      const double e = elementary_symmetric(v, p);
      worst = std::max(worst, std::abs(e - brute) / std::max(scale, 1e-300));
    }
  }
  return {"e_p recurrence equals subset sum", worst <= 1e-14, "max relative error " + fmt(worst)};
}

inline CheckResult sampler_determinism() {
  const ModelSpec model;
  const auto law = model.law();
  const SeriesConfig config{model.params, 50, 200, 1234};
  const auto a = simulate_ensemble(config, law, 40);
  const auto b = simulate_ensemble(config, law, 40);
  const auto c = simulate_ensemble({model.params, 50, 200, 1235}, law, 40);
  CounterRng s0 = CounterRng::stream_for(1, 0), s1 = CounterRng::stream_for(1, 1);
  int same_draws = 0;
  for (int i = 0; i < 64; ++i) same_draws += s0() == s1();
  const bool ok = a == b && !(a == c) && same_draws == 0 && paths_to_csv(a) == paths_to_csv(b);
  return {"bit-identical reruns", ok, "distinct streams share " + std::to_string(same_draws) + " of 64 draws"};
}

inline CheckResult window_shift_invariance(double scale) {
  const ModelSpec model;
  const auto law = model.law();
  const std::int64_t m = 20;
  const auto R = static_cast<std::int64_t>(10000 * scale);
  const PathSimulator sim({model.params, m, truncation_per_site(model.params, law, m, 8.0), 99}, law);
  const auto paths = simulate_columns(sim, R, 0, m + 1);
  const double d = ks_statistic(paths.column(0), paths.column(m));
  const double crit = ks_critical_1pct(static_cast<std::size_t>(R), static_cast<std::size_t>(R));
  return {"X_0 and X_m equal in law (KS)", d < crit, "D = " + fmt(d) + ", 1% critical " + fmt(crit)};
}

/// Odd p: X ≐ −X exactly, since flipping every sign flips e_p. Even p: e_p is
/// unchanged by a global flip, so only the tail is balanced; test above the 90%
/// quantile of |X_0|.
inline CheckResult sign_symmetry(double scale) {
  const auto law = InterRenewalLaw::shifted_pareto(0.25);
  const auto R = static_cast<std::int64_t>(10000 * scale);
  std::string detail;
  bool ok = true;
  for (const int p : {3, 2}) {
    const ModelParams params(1.0, BetaRatio{1, 4}, p);
    const PathSimulator sim({params, 100, truncation_per_site(params, law, 100, 8.0), 7}, law);
    const auto x = simulate_columns(sim, R, 0, 1).column(0);
    std::vector<double> mag(x.size());
    std::transform(x.begin(), x.end(), mag.begin(), [](double v) { return std::abs(v); });
    const double cut = p % 2 == 1 ? 0.0 : quantile_type1(mag, 0.9);
    std::int64_t n = 0, pos = 0;
    for (const double v : x)
      if (v != 0.0 && std::abs(v) > cut) ++n, pos += v > 0.0;
    const double frac = static_cast<double>(pos) / static_cast<double>(n);
    const double s = binomial_sigma(0.5, static_cast<double>(n));
    ok = ok && n > 0 && std::abs(frac - 0.5) <= 3 * s;
    detail += "p=" + std::to_string(p) + (p % 2 == 1 ? " all nonzero" : " top 10%") + ": P(X_0 > 0) = " + fmt(frac) +
              " +- " + fmt(s) + "; ";
  }
  return {"sign symmetry of X_0", ok, detail};
}

inline CheckResult manifest_round_trip() {
  ExperimentManifest m;
  m.kind = "simulate";
  m.config = to_json(SimulateSpec{}, 42);
  m.experiment_id = experiment_id(m.kind, m.config);
  m.started_at = "2000-01-01T00:00:00Z";
  m.finished_at = "2000-01-01T00:00:01Z";
  m.artifacts = {"paths.csv"};
  m.results.push_back({"a", 0.1, std::array{0.0, 0.2}, 1.0 / 3.0, Verdict::Pass, "x"});
  m.results.push_back({"b", std::nan(""), std::nullopt, std::nullopt, Verdict::Diagnostic, ""});
  const std::string text = save_manifest(m);
  const bool same = save_manifest(parse_manifest(text)) == text && parse_manifest(text) == m;
  bool rejected = false;
  auto j = Json::parse(text);
  j["surprise"] = 1;
  try {
    parse_manifest(j.dump());
  } catch (const SchemaError&) {
    rejected = true;
  }
  return {"manifest round trip", same && rejected, rejected ? "unknown field rejected" : "unknown field accepted"};
}

inline CheckResult renewal_sampler_vs_mass(double scale) {
  const auto law = InterRenewalLaw::shifted_pareto(0.5);
  const auto u = renewal_mass(law, 20);
  const auto R = static_cast<std::int64_t>(100000 * scale);
  std::vector<std::int64_t> hits(21, 0);
  CounterRng rng(0x5EED);
  for (std::int64_t r = 0; r < R; ++r)
    for (auto k : sample_renewal_path(law, 0, 20, rng).points) ++hits[static_cast<std::size_t>(k)];
  double worst = 0.0;
  for (std::size_t k = 0; k <= 20; ++k) {
    const double s = binomial_sigma(u[k], static_cast<double>(R));
    if (s > 0) worst = std::max(worst, std::abs(static_cast<double>(hits[k]) / R - u[k]) / s);
  }
  return {"renewal hits match u(k)", worst <= 3.0 + 0.5, "max |z| = " + fmt(worst)};
}

inline CheckResult v_tail_harness(double scale) {
  const double alpha = 1.0, x = 1e3;
  const auto n = static_cast<std::int64_t>(2000000 * scale);
  const double mc = v_tail_mc(alpha, x, n, 11);
  const double exact = v_tail_exact(alpha, x);
  const double s = binomial_sigma(exact, static_cast<double>(n));
  const double ratio = mc / v_tail_asymptote(alpha, x);
  return {"V tail harness", std::abs(mc - exact) <= 3.5 * s && ratio >= 0.8 && ratio <= 1.2,
          "MC/asymptote = " + fmt(ratio)};
}

inline CheckResult geometric_calibration(double scale) {
  const double q = 0.3;
  const auto n = static_cast<std::int64_t>(100000 * scale);
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(n));
  CounterRng rng(0x6E0);
  for (auto& k : sizes) k = 1 + static_cast<std::int64_t>(std::floor(std::log(rng.uniform_open()) / std::log1p(-q)));
  const auto fit = fit_geometric(sizes);
  const double se_q = q * std::sqrt((1.0 - q) / static_cast<double>(n));
  return {"geometric fit recovers q", std::abs(fit.q_hat - q) <= 3 * se_q, "q_hat = " + fmt(fit.q_hat)};
}

inline CheckResult ei_calibration(double scale) {
  const double alpha = 1.0;
  const std::int64_t n = 200;
  const auto R = static_cast<std::int64_t>(5000 * scale);
  std::vector<double> maxima(static_cast<std::size_t>(R));
  for (std::int64_t r = 0; r < R; ++r) {
    CounterRng rng = CounterRng::stream_for(77, static_cast<std::uint64_t>(r));
    double mx = 0.0;
    for (std::int64_t k = 0; k < n; ++k) mx = std::max(mx, std::pow(rng.exponential(), -1.0 / alpha));
    maxima[static_cast<std::size_t>(r)] = mx;
  }
  const std::vector<double> levels{0.5, 1.0, 2.0};
  const auto est = estimate_extremal_index(maxima, n, static_cast<double>(n), alpha, levels, 200, 3);
  return {"EI estimator on i.i.d. Frechet", est.ci_lower <= 1.0 && 1.0 <= est.ci_upper,
          "theta_hat = " + fmt(est.pooled) + " CI [" + fmt(est.ci_lower) + ", " + fmt(est.ci_upper) + "]"};
}

}  // namespace selftest

/// The property suite. scale = 1 matches the acceptance sizes.
inline std::vector<CheckResult> run_selftest(double scale = 0.2) {
  if (!(scale > 0.0)) throw DomainError("selftest scale must be positive");
  std::vector<CheckResult> out;
  out.push_back(selftest::shape_constant_grid());
  out.push_back(selftest::elementary_symmetric_bruteforce());
  out.push_back(selftest::sampler_determinism());
  out.push_back(selftest::window_shift_invariance(scale));
  out.push_back(selftest::sign_symmetry(scale));
  out.push_back(selftest::manifest_round_trip());
  out.push_back(selftest::renewal_sampler_vs_mass(scale));
  out.push_back(selftest::v_tail_harness(scale));
  out.push_back(selftest::geometric_calibration(scale));
  out.push_back(selftest::ei_calibration(scale));
  return out;
}

}  // namespace srms
