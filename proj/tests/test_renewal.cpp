#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "srms/renewal.hpp"
#include "srms/stats.hpp"

using namespace srms;

namespace {

// Frozen from tests/oracles/renewal_oracle.py (numpy recursion).
constexpr double kU025[] = {1.0,
                            0.1591035847462855,
                            0.10637468028124042,
                            0.08255055008587728,
                            0.06851273156648931,
                            0.05910269399531903,
                            0.052286956946596574,
                            0.04708712726705813,
                            0.04296914235037838,
                            0.03961468357096766,
                            0.036821261343156164,
                            0.034453427975532,
                            0.03241687933598564,
                            0.030643775541564403,
                            0.02908396850230087,
                            0.027699525350542237,
                            0.026461181609208906,
                            0.025345971068807514,
                            0.024335598581672353,
                            0.023415296239282825,
                            0.022573002463503355};

}  // namespace

TEST(Survival, DefaultFamilyClosedForm) {
  const auto half = InterRenewalLaw::shifted_pareto(0.5);
  EXPECT_EQ(survival(half, 0), 1.0);
  EXPECT_NEAR(survival(half, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(survival(InterRenewalLaw::shifted_pareto(0.25), 15), 0.5);
  EXPECT_THROW(survival(half, -1), DomainError);
}

TEST(Pmf, DefaultFamilyClosedForm) {
  const auto half = InterRenewalLaw::shifted_pareto(0.5);
  EXPECT_NEAR(pmf(half, 1), 1.0 - std::pow(2.0, -0.5), 1e-15);
  EXPECT_NEAR(pmf(half, 2), std::pow(2.0, -0.5) - std::pow(3.0, -0.5), 1e-15);
  EXPECT_THROW(pmf(half, 0), DomainError);
}

TEST(Pmf, TelescopesToOne) {
  for (const auto& law : {InterRenewalLaw::shifted_pareto(0.3), InterRenewalLaw::lomax(0.6, 2.5)}) {
    long double s = 0.0L;
    for (std::int64_t n = 1; n <= 5000; ++n) {
      EXPECT_GE(law.pmf(n), 0.0);
      s += law.pmf(n);
    }
    EXPECT_NEAR(static_cast<double>(s) + law.survival(5000), 1.0, 1e-13) << law.describe();
  }
}

TEST(Survival, RegularVariationAndDoney) {
  for (const auto& law : {InterRenewalLaw::shifted_pareto(0.25), InterRenewalLaw::lomax(0.7, 3.0)}) {
    const double c4 = law.survival(10000) * std::pow(1e4, law.beta());
    const double c6 = law.survival(1000000) * std::pow(1e6, law.beta());
    EXPECT_NEAR(c4 / c6, 1.0, 0.01) << law.describe();
    EXPECT_NEAR(c6, law.tail_constant(), 0.01 * law.tail_constant());
    double doney = 0.0;
    for (std::int64_t n = 1; n <= 1000000; n = n < 1000 ? n + 1 : n * 11 / 10)
      doney = std::max(doney, n * law.pmf(n) / law.survival(n));
    EXPECT_LE(doney, law.doney_bound()) << law.describe();
  }
  // Default family: n f(n) / F̄(n) stays below 2β.
  const auto law = InterRenewalLaw::shifted_pareto(0.4);
  for (std::int64_t n = 1; n <= 1000000; n *= 10) EXPECT_LE(n * law.pmf(n) / law.survival(n), 0.8);
}

TEST(Survival, NonIncreasing) {
  const auto law = InterRenewalLaw::lomax(0.5, 0.7);
  for (std::int64_t k = 1; k < 2000; ++k) EXPECT_LE(law.survival(k), law.survival(k - 1));
}

TEST(RenewalMass, HandValues) {
  const auto u = renewal_mass(InterRenewalLaw::shifted_pareto(0.5), 4);
  EXPECT_EQ(u[0], 1.0);
  EXPECT_NEAR(u[1], 0.2928932188134524, 1e-15);
  EXPECT_NEAR(u[2], 0.21554294962382675, 1e-15);
  const double f1 = 1 - std::pow(2.0, -0.5), f2 = std::pow(2.0, -0.5) - std::pow(3.0, -0.5);
  EXPECT_NEAR(u[2], f1 * f1 + f2, 1e-15);
}

TEST(RenewalMass, MatchesIndependentOracle) {
  const auto u = renewal_mass(InterRenewalLaw::shifted_pareto(0.25), 20);
  for (std::size_t k = 0; k <= 20; ++k) EXPECT_NEAR(u[k], kU025[k], 1e-15) << k;
}

TEST(RenewalMass, RecursionResidualIsZero) {
  const auto law = InterRenewalLaw::lomax(0.35, 1.5);
  const auto u = renewal_mass(law, 600);
  for (std::int64_t k = 1; k <= 600; ++k) {
    long double s = 0.0L;
    for (std::int64_t j = 1; j <= k; ++j) s += law.pmf(j) * static_cast<long double>(u[static_cast<std::size_t>(k - j)]);
    EXPECT_NEAR(u[static_cast<std::size_t>(k)], static_cast<double>(s), 1e-15);
    EXPECT_GT(u[static_cast<std::size_t>(k)], 0.0);
    EXPECT_LE(u[static_cast<std::size_t>(k)], 1.0);
  }
}

TEST(RenewalMass, BlockedTableAgreesAndExtends) {
  const auto law = InterRenewalLaw::shifted_pareto(0.75);
  const auto ref = renewal_mass(law, 3000);
  RenewalMassTable table(law);
  table.extend_to(100);
  table.extend_to(1777);
  table.extend_to(3000);
  ASSERT_EQ(table.size(), 3001);
  for (std::int64_t k = 0; k <= 3000; ++k)
    EXPECT_NEAR(table[k], ref[static_cast<std::size_t>(k)], 1e-15 * std::max(1.0, 1.0 / ref[static_cast<std::size_t>(k)]));
}

TEST(RenewalMassAsymptote, Values) {
  const auto half = InterRenewalLaw::shifted_pareto(0.5);
  EXPECT_NEAR(renewal_mass_asymptote(half, 1.0), 1.0 / std::numbers::pi, 1e-14);
  // Γ(0.25), Γ(0.75) from a 30-digit mpmath evaluation.
  const double oracle = 0.028134884879909564674;
  EXPECT_NEAR(renewal_mass_asymptote(InterRenewalLaw::shifted_pareto(0.25), 16.0), oracle, 1e-15);
  EXPECT_NEAR(gamma_fn(0.25), 3.62560990822190831193, 3.6e-14);
  EXPECT_NEAR(gamma_fn(0.75), 1.22541670246517764513, 1.2e-14);
}

TEST(RenewalMassAsymptote, RatioApproachesOne) {
  const auto law = InterRenewalLaw::shifted_pareto(0.5);
  RenewalMassTable t(law);
  t.extend_to(20000);
  const double r1 = t[1000] / renewal_mass_asymptote(law, 1000);
  const double r2 = t[20000] / renewal_mass_asymptote(law, 20000);
  EXPECT_LT(std::abs(r2 - 1.0), std::abs(r1 - 1.0));
  EXPECT_NEAR(r2, 1.0, 0.02);
}

TEST(WindowWeight, Values) {
  const auto half = InterRenewalLaw::shifted_pareto(0.5);
  EXPECT_EQ(window_weight(half, 0), 1.0);
  EXPECT_NEAR(window_weight(half, 2), 1 + std::pow(2.0, -0.5) + std::pow(3.0, -0.5), 1e-15);
  EXPECT_NEAR(window_weight(half, 2), 2.284457050376173, 1e-15);
  EXPECT_NEAR(window_weight(InterRenewalLaw::shifted_pareto(0.25), 2), 2.600732100905307, 1e-15);
  EXPECT_NEAR(window_weight(InterRenewalLaw::shifted_pareto(0.75), 2), 2.033294895152191, 1e-15);
  EXPECT_NEAR(window_weight(half, 1000000) / 2000.0, 1.0, 0.01);
}

TEST(SampleRenewalPath, Conventions) {
  const auto law = InterRenewalLaw::shifted_pareto(0.3);
  CounterRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto path = sample_renewal_path(law, 0, 50, rng);
    ASSERT_FALSE(path.points.empty());
    EXPECT_EQ(path.points.front(), 0);
    for (std::size_t j = 1; j < path.points.size(); ++j) EXPECT_LT(path.points[j - 1], path.points[j]);
    EXPECT_LE(path.points.back(), 50);
  }
  EXPECT_EQ(sample_renewal_path(law, 50, 50, rng).points, std::vector<std::int64_t>{50});
  EXPECT_TRUE(sample_renewal_path(law, 51, 50, rng).points.empty());
}

TEST(SampleRenewalPath, HitFrequenciesMatchMass) {
  for (const auto& law : {InterRenewalLaw::shifted_pareto(0.25), InterRenewalLaw::lomax(0.6, 2.0)}) {
    const auto u = renewal_mass(law, 20);
    const std::int64_t R = 100000;
    std::vector<std::int64_t> hits(21, 0);
    CounterRng rng(0xABC);
    for (std::int64_t r = 0; r < R; ++r)
      for (auto k : sample_renewal_path(law, 0, 20, rng).points) ++hits[static_cast<std::size_t>(k)];
    for (std::size_t k = 1; k <= 20; ++k) {
      const double s = binomial_sigma(u[k], static_cast<double>(R));
      EXPECT_NEAR(static_cast<double>(hits[k]) / R, u[k], 3.5 * s) << law.describe() << " k=" << k;
    }
  }
}

TEST(WindowHittingSet, ZeroWindow) {
  const auto law = InterRenewalLaw::shifted_pareto(0.5);
  CounterRng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_window_hitting_set(law, 0, rng).points, std::vector<std::int64_t>{0});
}

TEST(WindowHittingSet, UniformCover) {
  const auto law = InterRenewalLaw::shifted_pareto(0.25);
  const std::int64_t m = 10, R = 100000;
  const WindowSampler sampler(law, m);
  std::vector<std::int64_t> hits(m + 1, 0);
  CounterRng rng(77);
  for (std::int64_t r = 0; r < R; ++r) {
    const auto set = sampler.sample(rng);
    ASSERT_FALSE(set.points.empty());
    for (auto k : set.points) ++hits[static_cast<std::size_t>(k)];
  }
  const double target = 1.0 / window_weight(law, m);
  const double s = binomial_sigma(target, static_cast<double>(R));
  for (std::int64_t k = 0; k <= m; ++k)
    EXPECT_NEAR(static_cast<double>(hits[static_cast<std::size_t>(k)]) / R, target, 3.5 * s) << k;
}

TEST(WindowHittingSet, GapLawFromAPointMatchesF) {
  const auto law = InterRenewalLaw::shifted_pareto(0.5);
  const std::int64_t m = 40, R = 100000;
  const WindowSampler sampler(law, m);
  // Next point after k = 5 given 5 ∈ R_m, gaps up to 10.
  std::vector<std::int64_t> gap(12, 0);
  std::int64_t cond = 0;
  CounterRng rng(9);
  for (std::int64_t r = 0; r < R; ++r) {
    const auto set = sampler.sample(rng);
    const auto it = std::find(set.points.begin(), set.points.end(), 5);
    if (it == set.points.end()) continue;
    ++cond;
    const std::int64_t g = it + 1 == set.points.end() ? 11 : std::min<std::int64_t>(*(it + 1) - 5, 11);
    ++gap[static_cast<std::size_t>(g)];
  }
  for (std::int64_t j = 1; j <= 10; ++j) {
    const double s = binomial_sigma(law.pmf(j), static_cast<double>(cond));
    EXPECT_NEAR(static_cast<double>(gap[static_cast<std::size_t>(j)]) / cond, law.pmf(j), 3.5 * s) << j;
  }
}

TEST(IntersectPaths, Idempotent) {
  RenewalPath a{{0, 3, 7, 9}, 10};
  const std::vector<RenewalPath> same{a, a, a};
  EXPECT_EQ(intersect_paths(same), a);
  const std::vector<RenewalPath> disjoint{a, RenewalPath{{0, 1, 2, 8}, 10}};
  EXPECT_EQ(intersect_paths(disjoint).points, std::vector<std::int64_t>{0});
  const std::vector<RenewalPath> bad{a, RenewalPath{{0}, 11}};
  EXPECT_THROW(intersect_paths(bad), std::invalid_argument);
}

TEST(IntersectPaths, HitFrequenciesMatchPower) {
  const auto law = InterRenewalLaw::shifted_pareto(0.5);
  const auto u = renewal_mass(law, 15);
  const std::int64_t R = 100000;
  std::vector<std::int64_t> hits(16, 0);
  CounterRng rng(31);
  for (std::int64_t r = 0; r < R; ++r)
    for (auto k : sample_intersection(law, 2, 15, rng).points) ++hits[static_cast<std::size_t>(k)];
  EXPECT_EQ(hits[0], R);
  for (std::size_t k = 1; k <= 15; ++k) {
    const double t = u[k] * u[k];
    EXPECT_NEAR(static_cast<double>(hits[k]) / R, t, 3.5 * binomial_sigma(t, static_cast<double>(R))) << k;
  }
}

TEST(InterRenewalLaw, Validation) {
  EXPECT_THROW(InterRenewalLaw::shifted_pareto(1.0), DomainError);
  EXPECT_THROW(InterRenewalLaw::shifted_pareto(0.0), DomainError);
  EXPECT_THROW(InterRenewalLaw::lomax(0.5, -1.0), DomainError);
}

TEST(InterRenewalLaw, SamplerBeyondTableUsesClosedForm) {
  // Lomax has no closed-form inverse here; gaps past the table still land where F̄ says.
  const InterRenewalLaw law(std::make_shared<LomaxFamily>(0.5, 1.0), 64);
  for (const double u : {0.5, 0.1, 0.01, 1e-4}) {
    const auto g = law.gap_for_uniform(u, std::int64_t{1} << 40);
    EXPECT_LT(law.survival(g), u);
    EXPECT_GE(law.survival(g - 1), u);
  }
  EXPECT_EQ(law.gap_for_uniform(1e-6, 10), 11);
}
