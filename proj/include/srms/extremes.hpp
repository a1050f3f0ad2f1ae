#pragma once

// Estimators that confront simulated paths with the limit theorems:
// tail process masses, cluster sizes, extremal index, anti-clustering curve
// and the marginal tail. All are deterministic functions of their inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "srms/errors.hpp"
#include "srms/pathsim.hpp"
#include "srms/rng.hpp"
#include "srms/stats.hpp"
#include "srms/theory.hpp"

namespace srms {

/// Row-major replicates × sites.
struct PathMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> data;

  PathMatrix() = default;
  PathMatrix(std::int64_t r, std::int64_t c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double at(std::int64_t r, std::int64_t k) const {
    return data[static_cast<std::size_t>(r * cols + k)];
  }
  std::span<double> row(std::int64_t r) {
    return {data.data() + static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(std::int64_t r) const {
    return {data.data() + static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)};
  }
  std::vector<double> column(std::int64_t k) const {
    std::vector<double> out(static_cast<std::size_t>(rows));
    for (std::int64_t r = 0; r < rows; ++r) out[static_cast<std::size_t>(r)] = at(r, k);
    return out;
  }
};

/// Keeps sites [first, first + count) of each replicate.
inline PathMatrix simulate_columns(const PathSimulator& sim, std::int64_t replicates, std::int64_t first,
                                   std::int64_t count) {
  if (first < 0 || count < 1 || first + count > sim.config().window + 1)
    throw DomainError("simulate_columns: column range outside the window");
  PathMatrix out(replicates, count);
  for_each_replicate(
      sim, replicates, [] { return 0; },
      [&](int&, std::int64_t r, std::span<const double> v, std::span<const std::int32_t>) {
        std::copy_n(v.begin() + first, count, out.row(r).begin());
      });
  return out;
}

inline PathMatrix to_matrix(std::span<const SamplePath> paths) {
  if (paths.empty()) throw InsufficientDataError("empty ensemble");
  PathMatrix out(static_cast<std::int64_t>(paths.size()), static_cast<std::int64_t>(paths[0].values.size()));
  for (std::int64_t r = 0; r < out.rows; ++r) {
    const auto& v = paths[static_cast<std::size_t>(r)].values;
    if (static_cast<std::int64_t>(v.size()) != out.cols) throw DomainError("ensemble paths differ in length");
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

// ---------------------------------------------------------------- tail process

struct TailProcessEstimate {
  double quantile = 0.99;
  double threshold = 0.0;
  double delta = 0.1;
  std::int64_t counts = 0;
  std::vector<std::int64_t> lags;
  std::vector<double> mass_at_plus1;
  std::vector<double> mass_at_minus1;
  std::vector<double> mass_at_0;
  std::vector<double> residual;
};

/// Conditions on |X_0| above its empirical q-quantile and bins X_k / X_0 around
/// +1, −1 and 0 with half-width delta. Column 0 of `paths` is X_0.
inline TailProcessEstimate estimate_tail_process(const PathMatrix& paths, double q,
                                                 std::span<const std::int64_t> lags, double delta = 0.1,
                                                 std::int64_t min_exceedances = 30) {
  if (paths.rows < 1) throw InsufficientDataError("estimate_tail_process: empty ensemble");
  if (!(q > 0.9 && q < 1.0)) throw DomainError("estimate_tail_process: q must lie in (0.9, 1)");
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("estimate_tail_process: delta must lie in (0, 0.5)");
  for (auto k : lags)
    if (k < 0 || k >= paths.cols) throw DomainError("estimate_tail_process: lag outside the stored window");

  std::vector<double> abs0(static_cast<std::size_t>(paths.rows));
  for (std::int64_t r = 0; r < paths.rows; ++r) abs0[static_cast<std::size_t>(r)] = std::abs(paths.at(r, 0));
  TailProcessEstimate est;
  est.quantile = q;
  est.delta = delta;
  est.threshold = quantile_type1(abs0, q);
  est.lags.assign(lags.begin(), lags.end());
  const auto nl = lags.size();
  std::vector<std::int64_t> plus(nl, 0), minus(nl, 0), zero(nl, 0);
  for (std::int64_t r = 0; r < paths.rows; ++r) {
    if (!(abs0[static_cast<std::size_t>(r)] > est.threshold)) continue;
    ++est.counts;
    const double x0 = paths.at(r, 0);
    for (std::size_t i = 0; i < nl; ++i) {
      const double ratio = paths.at(r, lags[i]) / x0;
      if (std::abs(ratio - 1.0) < delta) ++plus[i];
      else if (std::abs(ratio + 1.0) < delta) ++minus[i];
      else if (std::abs(ratio) < delta) ++zero[i];
    }
  }
  if (est.counts < min_exceedances)
    throw InsufficientDataError("estimate_tail_process: only " + std::to_string(est.counts) +
                                " exceedances (need " + std::to_string(min_exceedances) + ")");
  const double n = static_cast<double>(est.counts);
  for (std::size_t i = 0; i < nl; ++i) {
    est.mass_at_plus1.push_back(static_cast<double>(plus[i]) / n);
    est.mass_at_minus1.push_back(static_cast<double>(minus[i]) / n);
    est.mass_at_0.push_back(static_cast<double>(zero[i]) / n);
    est.residual.push_back(static_cast<double>(est.counts - plus[i] - minus[i] - zero[i]) / n);
  }
  return est;
}

// ---------------------------------------------------------------- geometric fit

struct GeometricFit {
  std::int64_t n = 0;
  double mean = 0.0;
  /// MLE of the success probability, 1 / mean.
  double q_hat = 0.0;
  /// Standard error of the mean from the sample variance.
  double se_mean = 0.0;
};

/// Fit of P(G = k) = q (1−q)^{k−1}, k ≥ 1.
inline GeometricFit fit_geometric(std::span<const std::int64_t> sizes) {
  if (sizes.size() < 2) throw InsufficientDataError("fit_geometric: need at least two observations");
  GeometricFit fit;
  fit.n = static_cast<std::int64_t>(sizes.size());
  long double s = 0.0L, s2 = 0.0L;
  for (const auto k : sizes) {
    if (k < 1) throw DomainError("fit_geometric: sizes must be >= 1");
    s += k;
    s2 += static_cast<long double>(k) * k;
  }
  const long double n = fit.n;
  fit.mean = static_cast<double>(s / n);
  fit.q_hat = 1.0 / fit.mean;
  const long double var = (s2 - s * s / n) / (n - 1);
  fit.se_mean = static_cast<double>(std::sqrt(var / n));
  return fit;
}

/// |η ∩ {0..horizon}| for η the intersection of p non-delayed renewals.
inline std::int64_t intersection_count(const InterRenewalLaw& law, int p, std::int64_t horizon, CounterRng& rng) {
  return static_cast<std::int64_t>(sample_intersection(law, p, horizon, rng).points.size());
}

/// Cluster sizes |η ∩ {0..horizon}| for `samples` independent draws.
inline std::vector<std::int64_t> sample_intersection_counts(const InterRenewalLaw& law, int p, std::int64_t horizon,
                                                            std::int64_t samples, std::uint64_t seed) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(samples));
  parallel_for(samples, [&](std::int64_t i) {
    CounterRng rng = CounterRng::stream_for(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = intersection_count(law, p, horizon, rng);
  });
  return out;
}

// ---------------------------------------------------------------- clusters in paths

struct ClusterEstimate {
  std::int64_t block_length = 0;
  double level = 0.0;
  std::int64_t blocks = 0;
  /// size → number of blocks
  std::map<std::int64_t, std::int64_t> histogram;
  GeometricFit fit;
  /// Fraction of clusters whose exceedances all share one sign.
  double common_sign_frequency = 0.0;
  /// Fraction of clusters whose largest exceedance is positive.
  double positive_frequency = 0.0;
};

/// Cuts each row into consecutive blocks of r_n sites; in each block with
/// max |X_k| > a_n, counts exceedances of a_n in absolute value.
inline ClusterEstimate estimate_cluster_law(const PathMatrix& paths, std::int64_t r_n, double a_n,
                                            std::int64_t min_blocks = 10) {
  if (r_n < 1) throw DomainError("estimate_cluster_law: block length must be >= 1");
  if (!(a_n > 0.0)) throw DomainError("estimate_cluster_law: level must be positive");
  ClusterEstimate est;
  est.block_length = r_n;
  est.level = a_n;
  std::vector<std::int64_t> sizes;
  std::int64_t common = 0, positive = 0;
  for (std::int64_t r = 0; r < paths.rows; ++r) {
    const auto row = paths.row(r);
    for (std::int64_t start = 0; start + r_n <= paths.cols; start += r_n) {
      std::int64_t count = 0, pos = 0;
      double top = 0.0;
      for (std::int64_t k = start; k < start + r_n; ++k) {
        const double x = row[static_cast<std::size_t>(k)];
        if (std::abs(x) > a_n) {
          ++count;
          pos += x > 0.0;
          if (std::abs(x) > std::abs(top)) top = x;
        }
      }
      if (count == 0) continue;
      sizes.push_back(count);
      ++est.histogram[count];
      common += (pos == 0 || pos == count);
      positive += top > 0.0;
    }
  }
  est.blocks = static_cast<std::int64_t>(sizes.size());
  if (est.blocks < min_blocks)
    throw InsufficientDataError("estimate_cluster_law: only " + std::to_string(est.blocks) +
                                " blocks exceed the level");
  est.fit = fit_geometric(sizes);
  est.common_sign_frequency = static_cast<double>(common) / static_cast<double>(est.blocks);
  est.positive_frequency = static_cast<double>(positive) / static_cast<double>(est.blocks);
  return est;
}

// ---------------------------------------------------------------- extremal index

struct EIEstimate {
  std::int64_t n = 0;
  std::int64_t replicates = 0;
  double b_n = 0.0;
  std::vector<double> levels;
  std::vector<double> p_hat;
  std::vector<double> theta_hat;
  std::vector<double> std_error;
  /// Levels whose P̂ was 0 or 1.
  std::vector<double> dropped_levels;
  double pooled = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  int bootstrap = 0;
};

namespace detail {

struct PooledTheta {
  double pooled = 0.0;
  bool ok = false;
};

// θ̂(x) = −x^α log P̂ with delta-method variance x^{2α}(1−P̂)/(R P̂), pooled by inverse variance.
inline PooledTheta pool_theta(std::span<const std::int64_t> below, double R, std::span<const double> levels,
                              double alpha, EIEstimate* detail_out = nullptr) {
  double wsum = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double p = static_cast<double>(below[i]) / R;
    if (p <= 0.0 || p >= 1.0) {
      if (detail_out) detail_out->dropped_levels.push_back(levels[i]);
      continue;
    }
    const double xa = std::pow(levels[i], alpha);
    const double theta = -xa * std::log(p);
    const double var = xa * xa * (1.0 - p) / (R * p);
    if (detail_out) {
      detail_out->levels.push_back(levels[i]);
      detail_out->p_hat.push_back(p);
      detail_out->theta_hat.push_back(theta);
      detail_out->std_error.push_back(std::sqrt(var));
    }
    wsum += 1.0 / var;
    acc += theta / var;
  }
  if (wsum == 0.0) return {};
  return {acc / wsum, true};
}

}  // namespace detail

/// From block maxima M_r = max_{1≤k≤n} X_k of R independent replicates:
/// P̂(x) = #{M_r ≤ b_n x}/R per level, pooled θ̂, and a percentile bootstrap
/// CI over replicates.
inline EIEstimate estimate_extremal_index(std::span<const double> maxima, std::int64_t n, double b_n, double alpha,
                                          std::span<const double> levels, int bootstrap = 1000,
                                          std::uint64_t seed = 0) {
  if (maxima.size() < 2) throw InsufficientDataError("estimate_extremal_index: need at least two replicates");
  if (levels.empty()) throw DomainError("estimate_extremal_index: no levels");
  EIEstimate est;
  est.n = n;
  est.b_n = b_n;
  est.replicates = static_cast<std::int64_t>(maxima.size());
  est.bootstrap = bootstrap;
  const double R = static_cast<double>(maxima.size());
  std::vector<double> thresholds;
  for (const double x : levels) thresholds.push_back(b_n * x);
  auto count_below = [&](auto&& index_of) {
    std::vector<std::int64_t> below(levels.size(), 0);
    for (std::size_t j = 0; j < maxima.size(); ++j) {
      const double m = maxima[index_of(j)];
      for (std::size_t i = 0; i < levels.size(); ++i) below[i] += m <= thresholds[i];
    }
    return below;
  };
  const auto below = count_below([](std::size_t j) { return j; });
  const auto point = detail::pool_theta(below, R, levels, alpha, &est);
  if (!point.ok) throw InsufficientDataError("estimate_extremal_index: every level is degenerate (P̂ in {0,1})");
  est.pooled = point.pooled;

  std::vector<double> boot;
  boot.reserve(static_cast<std::size_t>(std::max(bootstrap, 0)));
  std::vector<std::size_t> idx(maxima.size());
  for (int b = 0; b < bootstrap; ++b) {
    CounterRng rng = CounterRng::stream_for(seed, static_cast<std::uint64_t>(b));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(maxima.size()));
    const auto res = detail::pool_theta(count_below([&](std::size_t j) { return idx[j]; }), R, levels, alpha);
    if (res.ok) boot.push_back(res.pooled);
  }
  if (!boot.empty()) {
    est.ci_lower = quantile_type1(boot, 0.025);
    est.ci_upper = quantile_type1(boot, 0.975);
  } else {
    est.ci_lower = est.ci_upper = est.pooled;
  }
  return est;
}

/// Affine permutation r ↦ (a r + c) mod R with gcd(a, R) = 1, keyed per site.
/// Used to build the i.i.d. control: site k of control row π_k(r) is X_{r,k}.
class SitePermutation {
 public:
  SitePermutation(std::int64_t rows, std::uint64_t seed, std::int64_t site) : rows_(rows) {
    CounterRng rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(site) + 0x632BE59BD9B4E019ULL)));
    do a_ = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(std::max<std::int64_t>(rows - 1, 1))));
    while (std::gcd(a_, rows_) != 1);
    c_ = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(rows)));
  }
  std::int64_t operator()(std::int64_t r) const {
    return static_cast<std::int64_t>((static_cast<unsigned __int128>(a_) * static_cast<std::uint64_t>(r) +
                                      static_cast<std::uint64_t>(c_)) %
                                     static_cast<std::uint64_t>(rows_));
  }

 private:
  std::int64_t rows_;
  std::int64_t a_ = 1;
  std::int64_t c_ = 0;
};

// ---------------------------------------------------------------- anti-clustering

struct AntiClusteringCurve {
  std::int64_t r = 0;
  double threshold = 0.0;
  std::int64_t exceedances = 0;
  std::vector<std::int64_t> ell;
  std::vector<double> probability;
};

/// For a centered row of length 2r+1: −1 if |X_0| ≤ threshold, otherwise the
/// largest |k| ≤ r with |X_k| > threshold (0 when none).
inline std::int64_t exceedance_reach(std::span<const double> row, double threshold) {
  const auto r = static_cast<std::int64_t>(row.size() / 2);
  if (!(std::abs(row[static_cast<std::size_t>(r)]) > threshold)) return -1;
  for (std::int64_t d = r; d >= 1; --d)
    if (std::abs(row[static_cast<std::size_t>(r - d)]) > threshold ||
        std::abs(row[static_cast<std::size_t>(r + d)]) > threshold)
      return d;
  return 0;
}

/// P̂(max_{ℓ≤|k|≤r} |X_k| > threshold | |X_0| > threshold) for each ℓ, from reaches.
/// Nonincreasing in ℓ by construction; zero for ℓ > r.
inline AntiClusteringCurve anti_clustering_from_reach(std::span<const std::int64_t> reach, std::int64_t r,
                                                      double threshold, std::span<const std::int64_t> ells,
                                                      std::int64_t min_exceedances = 20) {
  AntiClusteringCurve c;
  c.r = r;
  c.threshold = threshold;
  std::vector<std::int64_t> hits(ells.size(), 0);
  for (const auto d : reach) {
    if (d < 0) continue;
    ++c.exceedances;
    for (std::size_t i = 0; i < ells.size(); ++i) hits[i] += d >= ells[i] && ells[i] >= 1;
  }
  if (c.exceedances < min_exceedances)
    throw InsufficientDataError("anti_clustering_curve: only " + std::to_string(c.exceedances) +
                                " exceedances at the center");
  std::vector<std::size_t> order(ells.size());
  for (std::size_t i = 0; i < ells.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ells[a] < ells[b]; });
  for (const auto i : order) {
    c.ell.push_back(ells[i]);
    c.probability.push_back(static_cast<double>(hits[i]) / static_cast<double>(c.exceedances));
  }
  return c;
}

/// Rows of `centered` have length 2r+1 with X_0 in the middle.
inline AntiClusteringCurve anti_clustering_curve(const PathMatrix& centered, double threshold,
                                                 std::span<const std::int64_t> ells,
                                                 std::int64_t min_exceedances = 20) {
  if (centered.cols % 2 != 1) throw DomainError("anti_clustering_curve: rows must have odd length 2r+1");
  std::vector<std::int64_t> reach(static_cast<std::size_t>(centered.rows));
  for (std::int64_t r = 0; r < centered.rows; ++r)
    reach[static_cast<std::size_t>(r)] = exceedance_reach(centered.row(r), threshold);
  return anti_clustering_from_reach(reach, centered.cols / 2, threshold, ells, min_exceedances);
}

// ---------------------------------------------------------------- marginal tail

struct MarginalTailReport {
  std::int64_t n = 0;
  std::vector<double> x;
  std::vector<double> survival;
  std::vector<double> asymptote;
  std::vector<double> ratio;
  /// P̂(X > x) / P̂(|X| > x) on the grid.
  std::vector<double> one_sided_ratio;
  /// log-log slope of P̂(|X| > x) between the 0.99 and 0.999 quantiles of |X|.
  double slope = 0.0;
  double top_decile_level = 0.0;
  double top_decile_one_sided = 0.0;
  double top_decile_sigma = 0.0;
  double q999_level = 0.0;
  double q999_ratio = 0.0;
  std::string note = "remainder P(|X - T| > x) = O(x^-alpha log^(p-2) x) is not separately measurable";
};

inline MarginalTailReport marginal_tail_report(std::span<const double> sample, const ModelParams& params,
                                               int grid_points = 8) {
  if (sample.size() < 1000) throw InsufficientDataError("marginal_tail_report: need at least 1000 values");
  MarginalTailReport rep;
  rep.n = static_cast<std::int64_t>(sample.size());
  std::vector<double> a(sample.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(sample[i]);
  std::vector<double> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto surv = [&](double x) {
    return static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x)) / n;
  };
  auto pos = [&](double x) {
    return static_cast<double>(std::count_if(sample.begin(), sample.end(), [&](double v) { return v > x; })) / n;
  };
  const double q90 = quantile_type1(a, 0.9), q99 = quantile_type1(a, 0.99), q999 = quantile_type1(a, 0.999);
  if (!(q90 > 1.0)) throw InsufficientDataError("marginal_tail_report: 0.9 quantile of |X| must exceed 1");
  for (int i = 0; i < grid_points; ++i) {
    const double x = q90 * std::pow(q999 / q90, static_cast<double>(i) / (grid_points - 1));
    const double s = surv(x);
    rep.x.push_back(x);
    rep.survival.push_back(s);
    rep.asymptote.push_back(marginal_tail_asymptote(params, x));
    rep.ratio.push_back(s / rep.asymptote.back());
    rep.one_sided_ratio.push_back(s > 0.0 ? pos(x) / s : std::nan(""));
  }
  std::vector<double> lx, ly;
  for (int i = 0; i < 6; ++i) {
    const double x = q99 * std::pow(q999 / q99, i / 5.0);
    const double s = surv(x);
    if (s > 0.0) lx.push_back(std::log(x)), ly.push_back(std::log(s));
  }
  rep.slope = ols_slope(lx, ly);
  rep.top_decile_level = q90;
  const double s90 = surv(q90);
  rep.top_decile_one_sided = pos(q90) / s90;
  rep.top_decile_sigma = binomial_sigma(0.5, s90 * n);
  rep.q999_level = q999;
  rep.q999_ratio = surv(q999) / marginal_tail_asymptote(params, q999);
  return rep;
}

// ---------------------------------------------------------------- harness self-tests

/// V = ε_1 ε_2 (U_1 U_2)^{-1/α}.
inline double sample_v(double alpha, CounterRng& rng) {
  const int s = rng.rademacher() * rng.rademacher();
  const double u = rng.uniform_open() * rng.uniform_open();
  return s * std::pow(u, -1.0 / alpha);
}

/// P(V > x) = ½ x^{-α} (1 + α log x) for x ≥ 1.
inline double v_tail_exact(double alpha, double x) {
  return 0.5 * std::pow(x, -alpha) * (1.0 + alpha * std::log(x));
}

inline double v_tail_asymptote(double alpha, double x) { return 0.5 * alpha * std::pow(x, -alpha) * std::log(x); }

/// Empirical P(V > x).
inline double v_tail_mc(double alpha, double x, std::int64_t samples, std::uint64_t seed) {
  const auto counts = parallel_accumulate(
      samples, [] { return std::int64_t{0}; },
      [&](std::int64_t& c, std::int64_t i) {
        CounterRng rng = CounterRng::stream_for(seed, static_cast<std::uint64_t>(i));
        c += sample_v(alpha, rng) > x;
      },
      4096);
  std::int64_t total = 0;
  for (const auto c : counts) total += c;
  return static_cast<double>(total) / static_cast<double>(samples);
}

/// Empirical P(1/(Γ_1⋯Γ_p) > x).
inline double product_gamma_tail_mc(int p, double x, std::int64_t samples, std::uint64_t seed) {
  if (p < 1) throw DomainError("product_gamma_tail_mc: p must be >= 1");
  const double log_x = std::log(x);
  const auto counts = parallel_accumulate(
      samples, [] { return std::int64_t{0}; },
      [&](std::int64_t& c, std::int64_t i) {
        CounterRng rng = CounterRng::stream_for(seed, static_cast<std::uint64_t>(i));
        double g = 0.0, s = 0.0;
        for (int j = 0; j < p; ++j) s += std::log(g += rng.exponential());
        c += -s > log_x;
      },
      4096);
  std::int64_t total = 0;
  for (const auto c : counts) total += c;
  return static_cast<double>(total) / static_cast<double>(samples);
}

}  // namespace srms
