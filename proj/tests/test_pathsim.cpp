#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "srms/extremes.hpp"
#include "srms/pathsim.hpp"
#include "srms/stats.hpp"

using namespace srms;

namespace {

const ModelParams kDefault(1.0, BetaRatio{1, 4}, 2);
const InterRenewalLaw kLaw = InterRenewalLaw::shifted_pareto(0.25);

// Direct evaluation of the series from the same random draws: enumerate index
// tuples i_1 < ... < i_p whose hitting sets all contain k. Also returns the
// sum of |terms| per site, the natural scale for rounding error.
struct Direct {
  std::vector<double> x, scale;
};

Direct brute_force_path(const SeriesConfig& c, const InterRenewalLaw& law, std::uint64_t replicate) {
  CounterRng rng = CounterRng::stream_for(c.seed, replicate);
  const WindowSampler sampler(law, c.window);
  const auto L = static_cast<std::size_t>(c.truncation);
  std::vector<double> v(L);
  std::vector<std::vector<std::int64_t>> sets(L);
  double g = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    g += rng.exponential();
    const int eps = rng.rademacher();
    v[i] = eps * std::pow(g, -1.0 / c.params.alpha);
    sets[i] = sampler.sample(rng).points;
  }
  const double scale = std::pow(window_weight(law, c.window), c.params.p / c.params.alpha);
  Direct out;
  out.x.assign(static_cast<std::size_t>(c.window) + 1, 0.0);
  out.scale.assign(out.x.size(), 0.0);
  for (std::int64_t k = 0; k <= c.window; ++k) {
    std::vector<double> active;
    for (std::size_t i = 0; i < L; ++i)
      if (std::binary_search(sets[i].begin(), sets[i].end(), k)) active.push_back(v[i]);
    double s = 0.0, a = 0.0;
    const auto n = active.size();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != c.params.p) continue;
      double prod = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) prod *= active[i];
      s += prod;
      a += std::abs(prod);
    }
    out.x[static_cast<std::size_t>(k)] = scale * s;
    out.scale[static_cast<std::size_t>(k)] = scale * a;
  }
  return out;
}

}  // namespace

TEST(GammaArrivals, MeanAndMonotone) {
  CounterRng rng(3);
  double s = 0.0;
  for (int i = 0; i < 1000000; ++i) s += sample_gamma_arrivals(1, rng)[0];
  EXPECT_NEAR(s / 1e6, 1.0, 0.01);
  const auto g = sample_gamma_arrivals(10000, rng);
  for (std::size_t i = 1; i < g.size(); ++i) ASSERT_GT(g[i], g[i - 1]);
  EXPECT_NEAR(g.back() / 1e4, 1.0, 0.03);
  EXPECT_THROW(sample_gamma_arrivals(0, rng), DomainError);
}

TEST(ElementarySymmetric, SmallCases) {
  const std::vector<double> v{2.0, -3.0, 5.0};
  EXPECT_EQ(elementary_symmetric(v, 0), 1.0);
  EXPECT_EQ(elementary_symmetric(v, 1), 4.0);
  EXPECT_EQ(elementary_symmetric(v, 2), -6.0 + 10.0 - 15.0);
  EXPECT_EQ(elementary_symmetric(v, 3), -30.0);
  EXPECT_EQ(elementary_symmetric(v, 4), 0.0);
}

TEST(ElementarySymmetric, BruteForceEquivalence) {
  CounterRng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = static_cast<int>(rng.below(9));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = (rng.uniform() - 0.5) * std::exp(8.0 * (rng.uniform() - 0.5));
    for (int p = 1; p <= 4; ++p) {
      double brute = 0.0, scale = 0.0;
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != p) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
          if (mask >> i & 1u) prod *= v[static_cast<std::size_t>(i)];
        brute += prod;
        scale += std::abs(prod);
      }
      EXPECT_LE(std::abs(elementary_symmetric(v, p) - brute), 1e-14 * std::max(scale, 1e-300));
    }
  }
}

TEST(SimulatePath, MatchesDirectSeriesEvaluation) {
  for (int p : {1, 2, 3}) {
    const SeriesConfig c{ModelParams(0.8, 0.3, p), 15, 12, 2024};
    const auto law = InterRenewalLaw::shifted_pareto(0.3);
    const PathSimulator sim(c, law);
    for (std::uint64_t r = 0; r < 20; ++r) {
      const auto path = sim.simulate(r);
      const auto ref = brute_force_path(c, law, r);
      ASSERT_EQ(path.values.size(), ref.x.size());
      for (std::size_t k = 0; k < ref.x.size(); ++k) {
        EXPECT_NEAR(path.values[k], ref.x[k], 1e-13 * ref.scale[k]) << "p=" << p << " k=" << k;
        if (ref.scale[k] == 0.0) {
          EXPECT_EQ(path.values[k], 0.0);
        }
      }
    }
  }
}

TEST(SimulatePath, ZeroBelowOrderAndCounts) {
  const SeriesConfig c{ModelParams(1.0, 0.25, 3), 60, 40, 8};
  const auto ens = simulate_ensemble(c, kLaw, 50);
  int zeros = 0;
  for (const auto& path : ens) {
    ASSERT_EQ(path.values.size(), 61u);
    ASSERT_EQ(path.active_counts.size(), 61u);
    for (std::size_t k = 0; k < path.values.size(); ++k) {
      EXPECT_TRUE(std::isfinite(path.values[k]));
      EXPECT_GE(path.active_counts[k], 0);
      if (path.active_counts[k] < 3) {
        EXPECT_EQ(path.values[k], 0.0);
        ++zeros;
      }
    }
  }
  EXPECT_GT(zeros, 0);
}

TEST(SimulatePath, P1IsPlainSum) {
  const SeriesConfig c{ModelParams(1.2, 0.5, 1), 10, 30, 4};
  const auto law = InterRenewalLaw::shifted_pareto(0.5);
  const auto path = simulate_path(c, law, 3);
  const auto ref = brute_force_path(c, law, 3);
  for (std::size_t k = 0; k < ref.x.size(); ++k) EXPECT_NEAR(path.values[k], ref.x[k], 1e-13 * ref.scale[k]);
}

TEST(SimulatePath, OverflowIsAnError) {
  // α = 0.001: (w/Γ_1)^{1/α} exceeds the double range whenever Γ_1 < w/2.
  const SeriesConfig c{ModelParams(0.001, 0.25, 2), 5, 10, 1};
  const PathSimulator sim(c, kLaw);
  bool threw = false;
  for (std::uint64_t r = 0; r < 50 && !threw; ++r) {
    try {
      sim.simulate(r);
    } catch (const OverflowError&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}

TEST(SimulatePath, ConfigValidation) {
  EXPECT_THROW(PathSimulator(SeriesConfig{kDefault, 10, 1, 0}, kLaw), DomainError);
  EXPECT_THROW(PathSimulator(SeriesConfig{kDefault, -1, 5, 0}, kLaw), DomainError);
  EXPECT_THROW(PathSimulator(SeriesConfig{kDefault, 10, 5, 0}, InterRenewalLaw::shifted_pareto(0.3)), DomainError);
}

TEST(SimulateEnsemble, Determinism) {
  const SeriesConfig c{kDefault, 100, 300, 42};
  const auto a = simulate_ensemble(c, kLaw, 64);
  const auto b = simulate_ensemble(c, kLaw, 64);
  EXPECT_EQ(a, b);
  // Thread count does not change the output.
  for (std::size_t r = 0; r < a.size(); r += 7) EXPECT_EQ(a[r], PathSimulator(c, kLaw).simulate(r));
  // Neighbouring streams differ in all of their first 64 draws.
  auto s0 = CounterRng::stream_for(42, 0), s1 = CounterRng::stream_for(42, 1);
  for (int i = 0; i < 64; ++i) EXPECT_NE(s0(), s1());
  EXPECT_NE(a[0], a[1]);
}

TEST(SimulateEnsemble, SignBalanceOddOrder) {
  // p odd: a global sign flip maps X to -X.
  const std::int64_t m = 1000;
  const ModelParams params(1.0, BetaRatio{1, 4}, 3);
  const SeriesConfig c{params, m, truncation_per_site(params, kLaw, m, 8.0), 42};
  const auto x0 = simulate_columns(PathSimulator(c, kLaw), 10000, 0, 1).column(0);
  std::int64_t nz = 0, pos = 0;
  for (const double x : x0) nz += x != 0.0, pos += x > 0.0;
  ASSERT_GT(nz, 1000);
  EXPECT_NEAR(static_cast<double>(pos) / nz, 0.5, 3.0 * binomial_sigma(0.5, static_cast<double>(nz)));
}

TEST(SimulateEnsemble, SignBalanceEvenOrderHoldsOnlyInTail) {
  // p even: e_p is invariant under a global flip. Three equal atoms give
  // e_2 in {-1, 3} with P(-1) = 3/4, so the bulk leans negative while the tail,
  // driven by one large atom times an independent sign, is balanced.
  const std::vector<double> eq{1.0, -1.0, 1.0};
  EXPECT_EQ(elementary_symmetric(eq, 2), -1.0);
  const std::int64_t m = 1000;
  const SeriesConfig c{kDefault, m, truncation_per_site(kDefault, kLaw, m, 8.0), 42};
  const auto x0 = simulate_columns(PathSimulator(c, kLaw), 10000, 0, 1).column(0);
  std::vector<double> mag;
  for (const double x : x0) mag.push_back(std::abs(x));
  const double cut = quantile_type1(mag, 0.9);
  std::int64_t nz = 0, pos = 0, tail = 0, tail_pos = 0;
  for (const double x : x0) {
    nz += x != 0.0, pos += x > 0.0;
    if (std::abs(x) > cut) ++tail, tail_pos += x > 0.0;
  }
  ASSERT_GT(tail, 500);
  EXPECT_LT(static_cast<double>(pos) / nz, 0.5 - 3.0 * binomial_sigma(0.5, static_cast<double>(nz)));
  EXPECT_NEAR(static_cast<double>(tail_pos) / tail, 0.5, 3.0 * binomial_sigma(0.5, static_cast<double>(tail)));
}

TEST(SimulateEnsemble, WindowStationarityKs) {
  const std::int64_t m = 30;
  const SeriesConfig c{kDefault, m, truncation_per_site(kDefault, kLaw, m, 8.0), 5};
  const auto paths = simulate_columns(PathSimulator(c, kLaw), 10000, 0, m + 1);
  const double crit = ks_critical_1pct(10000, 10000);
  for (const std::int64_t k : {7, 15, 30}) EXPECT_LT(ks_statistic(paths.column(0), paths.column(k)), crit) << k;
}

TEST(Truncation, DefaultRule) {
  const std::int64_t m = 10000;
  const double w = window_weight(kLaw, m);
  EXPECT_NEAR(w, 1332.67, 0.01);
  EXPECT_EQ(default_truncation(kDefault, kLaw, m), std::llround(w * w / (m * std::log(1e4))));
  std::int64_t prev = 0;
  for (std::int64_t mm = 100; mm <= 1000000; mm *= 10) {
    const auto L = default_truncation(kDefault, kLaw, mm);
    EXPECT_GE(L, kDefault.p + 1);
    EXPECT_GE(L, prev);
    prev = L;
  }
  EXPECT_THROW(default_truncation(kDefault, kLaw, 1), DomainError);
}

TEST(Truncation, Diagnostic) {
  const std::int64_t m = 500;
  const double w = window_weight(kLaw, m);
  const double b = normalizer_b(kDefault, m);
  const auto d = truncation_diagnostic({kDefault, m, 100, 0}, kLaw);
  EXPECT_TRUE(d.proven);
  EXPECT_NEAR(d.value, m / (b * b) * w * w / 100.0, 1e-12 * d.value);
  EXPECT_LT(truncation_diagnostic({kDefault, m, 200, 0}, kLaw).value, d.value);
  EXPECT_FALSE(truncation_diagnostic({ModelParams(1.0, 0.25, 3), m, 100, 0}, kLaw).proven);
  double prev = INFINITY;
  for (std::int64_t mm = 100; mm <= 1000000; mm *= 10) {
    const double v = truncation_diagnostic({kDefault, mm, default_truncation(kDefault, kLaw, mm), 0}, kLaw).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  const auto L = truncation_for_target(kDefault, kLaw, 200, 0.01);
  EXPECT_LE(truncation_diagnostic({kDefault, 200, L, 0}, kLaw).value, 0.01);
  EXPECT_GT(truncation_diagnostic({kDefault, 200, L - 1, 0}, kLaw).value, 0.01);
}

TEST(Truncation, PathCarriesBound) {
  const SeriesConfig c{kDefault, 50, 60, 1};
  EXPECT_DOUBLE_EQ(simulate_path(c, kLaw, 0).truncation_bound, truncation_diagnostic(c, kLaw).value);
}
