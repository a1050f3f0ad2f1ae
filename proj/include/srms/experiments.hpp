#pragma once

// End-to-end experiments: simulate, estimate, compare with theory, and record
// everything in a manifest. Each experiment is a pure function of its config,
// so a manifest's config section is enough to re-run it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "srms/errors.hpp"
#include "srms/extremes.hpp"
#include "srms/manifest.hpp"
#include "srms/pathsim.hpp"
#include "srms/renewal.hpp"
#include "srms/theory.hpp"

namespace srms {

// ---------------------------------------------------------------- config pieces

struct ModelSpec {
  ModelParams params{1.0, BetaRatio{1, 4}, 2};
  std::string family = "shifted-pareto";
  double scale = 1.0;  // lomax only

  InterRenewalLaw law() const {
    if (family == "shifted-pareto") return InterRenewalLaw::shifted_pareto(params.beta);
    if (family == "lomax") return InterRenewalLaw::lomax(params.beta, scale);
    throw DomainError("unknown inter-renewal family '" + family + "'");
  }
};

inline Json to_json(const ModelSpec& m) {
  Json j;
  j["alpha"] = m.params.alpha;
  j["beta"] = m.params.beta_text();
  j["p"] = m.params.p;
  j["family"] = m.family;
  j["scale"] = m.scale;
  return j;
}

inline ModelSpec model_from_json(const Json& j) {
  detail::reject_unknown(j, {"alpha", "beta", "p", "family", "scale"}, "model");
  ModelSpec m;
  m.params = ModelParams::parse(detail::required<double>(j, "alpha"), detail::required<std::string>(j, "beta"),
                                detail::required<int>(j, "p"));
  m.family = detail::required<std::string>(j, "family");
  m.scale = detail::required<double>(j, "scale");
  return m;
}

/// How L is chosen: "default" (window-rate formula), "target" (diagnostic ≤ value),
/// "per-site" (value · w_m) or "fixed" (L = value).
struct TruncationRule {
  std::string rule = "default";
  double value = 0.0;

  std::int64_t resolve(const ModelParams& params, const InterRenewalLaw& law, std::int64_t m) const {
    if (rule == "default") return default_truncation(params, law, m);
    if (rule == "target") return truncation_for_target(params, law, m, value);
    if (rule == "per-site") return truncation_per_site(params, law, m, value);
    if (rule == "fixed") {
      if (!(value >= params.p)) throw DomainError("fixed truncation must be at least p");
      return static_cast<std::int64_t>(value);
    }
    throw DomainError("unknown truncation rule '" + rule + "'");
  }
};

inline Json to_json(const TruncationRule& t, std::int64_t resolved) {
  return Json{{"rule", t.rule}, {"value", t.value}, {"L", resolved}};
}

inline TruncationRule truncation_from_json(const Json& j) {
  detail::reject_unknown(j, {"rule", "value", "L"}, "truncation");
  return {detail::required<std::string>(j, "rule"), detail::required<double>(j, "value")};
}

namespace detail {

inline ResultRecord diagnostic(std::string name, double estimate, std::string text = {},
                               std::optional<double> target = std::nullopt) {
  return {std::move(name), estimate, std::nullopt, target, Verdict::Diagnostic, std::move(text)};
}

inline ExperimentManifest start_manifest(const std::string& kind, const Json& config) {
  ExperimentManifest m;
  m.kind = kind;
  m.config = config;
  m.experiment_id = experiment_id(kind, config);
  m.started_at = utc_timestamp();
  return m;
}

inline void finish_manifest(ExperimentManifest& m, const std::optional<std::filesystem::path>& out_dir) {
  m.finished_at = utc_timestamp();
  if (out_dir) {
    m.artifacts.push_back("manifest.json");
    write_manifest(*out_dir / "manifest.json", m);
  }
}

inline void require_subcritical(const ModelParams& params, const char* what) {
  if (classify_regime(params).regime != Regime::SubCritical)
    throw NonConvergenceError(std::string(what) + " requires the sub-critical regime (p*beta - p + 1 < 0)");
}

}  // namespace detail

// ---------------------------------------------------------------- simulate

struct SimulateSpec {
  ModelSpec model;
  std::int64_t window = 1000;
  std::int64_t replicates = 10000;
  std::uint64_t seed = 42;
  TruncationRule truncation{"per-site", 8.0};
};

inline Json to_json(const SimulateSpec& s, std::int64_t L) {
  return Json{{"model", to_json(s.model)},
              {"window", s.window},
              {"replicates", s.replicates},
              {"seed", s.seed},
              {"truncation", to_json(s.truncation, L)}};
}

inline SimulateSpec simulate_from_json(const Json& j) {
  detail::reject_unknown(j, {"model", "window", "replicates", "seed", "truncation"}, "simulate config");
  return {model_from_json(detail::required<Json>(j, "model")), detail::required<std::int64_t>(j, "window"),
          detail::required<std::int64_t>(j, "replicates"), detail::required<std::uint64_t>(j, "seed"),
          truncation_from_json(detail::required<Json>(j, "truncation"))};
}

/// Paths to paths.csv; marginal-tail and sign checks on X_0.
inline std::int64_t resolved_truncation(const SimulateSpec& s) {
  return s.truncation.resolve(s.model.params, s.model.law(), s.window);
}

inline Json config_json(const SimulateSpec& s) { return to_json(s, resolved_truncation(s)); }

inline ExperimentManifest run_simulate(const SimulateSpec& spec,
                                       const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  const auto law = spec.model.law();
  const auto& params = spec.model.params;
  const std::int64_t L = resolved_truncation(spec);
  auto m = detail::start_manifest("simulate", to_json(spec, L));
  const SeriesConfig config{params, spec.window, L, spec.seed};
  const auto paths = simulate_ensemble(config, law, spec.replicates);
  if (out_dir) {
    write_file(*out_dir / "paths.csv", paths_to_csv(paths));
    m.artifacts.push_back("paths.csv");
  }
  const PathSimulator sim(config, law);
  m.results.push_back(detail::diagnostic("window_weight", sim.window_weight()));
  m.results.push_back(detail::diagnostic("truncation_L", static_cast<double>(L)));
  if (spec.window >= 2)
    m.results.push_back(detail::diagnostic("truncation_bound", sim.truncation_bound(),
                                           params.p == 2 ? "m b_m^-2 w_m^(4/alpha-2) L^(1-2/alpha)"
                                                         : "heuristic: same shape as p = 2, unproven"));
  std::vector<double> x0;
  std::int64_t nonzero = 0, positive = 0;
  for (const auto& path : paths) {
    x0.push_back(path.values[0]);
    nonzero += path.values[0] != 0.0;
    positive += path.values[0] > 0.0;
  }
  const double R = static_cast<double>(spec.replicates);
  m.results.push_back(detail::diagnostic("nonzero_fraction_X0", static_cast<double>(nonzero) / R));
  if (nonzero > 0) {
    const double frac = static_cast<double>(positive) / static_cast<double>(nonzero);
    const double sigma = binomial_sigma(0.5, static_cast<double>(nonzero));
    m.results.push_back({"sign_balance_X0", frac, std::array{0.5 - 3 * sigma, 0.5 + 3 * sigma}, 0.5,
                         pass_if(std::abs(frac - 0.5) <= 3 * sigma), "P(X_0 > 0 | X_0 != 0) within 3 sigma of 1/2"});
  }
  if (spec.replicates >= 1000 && nonzero >= spec.replicates / 10) {
    try {
      const auto rep = marginal_tail_report(x0, params);
      const double a = params.alpha;
      m.results.push_back({"tail_slope_top_decade", rep.slope, std::array{-1.25 * a, -0.8 * a}, -a,
                           pass_if(rep.slope >= -1.25 * a && rep.slope <= -0.8 * a),
                           "log-log slope of P(|X_0| > x) between the 0.99 and 0.999 quantiles"});
      m.results.push_back({"tail_ratio_q999", rep.q999_ratio, std::array{0.5, 2.0}, 1.0,
                           pass_if(rep.q999_ratio >= 0.5 && rep.q999_ratio <= 2.0),
                           "P(|X_0| > x) / asymptote at the 0.999 quantile"});
      const double s3 = 3 * rep.top_decile_sigma;
      m.results.push_back({"one_sided_ratio_top_decile", rep.top_decile_one_sided,
                           std::array{0.5 - s3, 0.5 + s3}, 0.5,
                           pass_if(std::abs(rep.top_decile_one_sided - 0.5) <= s3),
                           "P(X_0 > x) / P(|X_0| > x) at the 0.9 quantile"});
      for (std::size_t i = 0; i < rep.x.size(); ++i)
        m.results.push_back(detail::diagnostic("tail_ratio_grid_" + std::to_string(i), rep.ratio[i],
                                               "x = " + std::to_string(rep.x[i]), 1.0));
      m.results.push_back(detail::diagnostic("tail_remainder", std::nan(""), rep.note));
    } catch (const InsufficientDataError& e) {
      m.results.push_back(detail::diagnostic("marginal_tail", std::nan(""), e.what()));
    }
  }
  detail::finish_manifest(m, out_dir);
  return m;
}

// ---------------------------------------------------------------- tail process

struct TailprocSpec {
  ModelSpec model;
  std::int64_t window = 200;
  std::int64_t replicates = 100000;
  std::uint64_t seed = 42;
  TruncationRule truncation{"target", 0.01};
  double quantile = 0.99;
  double delta = 0.1;
  std::int64_t max_lag = 10;
};

inline Json to_json(const TailprocSpec& s, std::int64_t L) {
  return Json{{"model", to_json(s.model)},         {"window", s.window},     {"replicates", s.replicates},
              {"seed", s.seed},                     {"truncation", to_json(s.truncation, L)},
              {"quantile", s.quantile},             {"delta", s.delta},       {"max_lag", s.max_lag}};
}

inline TailprocSpec tailproc_from_json(const Json& j) {
  detail::reject_unknown(j, {"model", "window", "replicates", "seed", "truncation", "quantile", "delta", "max_lag"},
                         "tailproc config");
  TailprocSpec s;
  s.model = model_from_json(detail::required<Json>(j, "model"));
  s.window = detail::required<std::int64_t>(j, "window");
  s.replicates = detail::required<std::int64_t>(j, "replicates");
  s.seed = detail::required<std::uint64_t>(j, "seed");
  s.truncation = truncation_from_json(detail::required<Json>(j, "truncation"));
  s.quantile = detail::required<double>(j, "quantile");
  s.delta = detail::required<double>(j, "delta");
  s.max_lag = detail::required<std::int64_t>(j, "max_lag");
  return s;
}

/// Masses of X_k / X_0 near +1 (target u(k)^p) and −1 (target 0) given a large |X_0|.
inline std::int64_t resolved_truncation(const TailprocSpec& s) {
  return s.truncation.resolve(s.model.params, s.model.law(), s.window);
}

inline Json config_json(const TailprocSpec& s) { return to_json(s, resolved_truncation(s)); }

inline ExperimentManifest run_tailproc(const TailprocSpec& spec,
                                       const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  const auto law = spec.model.law();
  const auto& params = spec.model.params;
  if (spec.max_lag < 1 || spec.max_lag > spec.window) throw DomainError("max_lag must lie in [1, window]");
  const std::int64_t L = resolved_truncation(spec);
  auto m = detail::start_manifest("tailproc", to_json(spec, L));
  const PathSimulator sim({params, spec.window, L, spec.seed}, law);
  const auto cols = simulate_columns(sim, spec.replicates, 0, spec.max_lag + 1);
  std::vector<std::int64_t> lags;
  for (std::int64_t k = 0; k <= spec.max_lag; ++k) lags.push_back(k);
  const auto est = estimate_tail_process(cols, spec.quantile, lags, spec.delta);
  const auto u = renewal_mass(law, spec.max_lag);
  const double n = static_cast<double>(est.counts);

  m.results.push_back(detail::diagnostic("truncation_bound", sim.truncation_bound()));
  m.results.push_back(detail::diagnostic("threshold", est.threshold, "empirical quantile of |X_0|"));
  m.results.push_back(detail::diagnostic("exceedances", n));
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const auto k = lags[i];
    const double t = std::pow(u[static_cast<std::size_t>(k)], params.p);
    const double s = binomial_sigma(t, n);
    const std::string lag = std::to_string(k);
    if (k == 0) {
      m.results.push_back(detail::diagnostic("plus1_lag_0", est.mass_at_plus1[i], "ratio X_0/X_0", 1.0));
      continue;
    }
    m.results.push_back({"plus1_lag_" + lag, est.mass_at_plus1[i], std::array{t - 3 * s, t + 3 * s}, t,
                         pass_if(std::abs(est.mass_at_plus1[i] - t) <= 3 * s), "target u(k)^p, band 3 binomial sigma"});
    // A zero-probability target has no binomial spread; use the estimate's own sigma.
    const double e = est.mass_at_minus1[i];
    const double s0 = binomial_sigma(e, n);
    m.results.push_back({"minus1_lag_" + lag, e, std::array{0.0, 3 * s0}, 0.0, pass_if(e <= 3 * s0),
                         "within 3 of its own binomial sigma of zero"});
    m.results.push_back(detail::diagnostic("zero_lag_" + lag, est.mass_at_0[i], "target 1 - u(k)^p", 1.0 - t));
    m.results.push_back(detail::diagnostic("residual_lag_" + lag, est.residual[i]));
  }
  detail::finish_manifest(m, out_dir);
  return m;
}

// ---------------------------------------------------------------- extremal index

struct EiSpec {
  ModelSpec model;
  std::int64_t n = 10000;
  std::int64_t replicates = 10000;
  std::uint64_t seed = 42;
  TruncationRule truncation{"target", 0.01};
  std::vector<double> levels{0.25, 0.5, 1.0, 2.0, 4.0};
  int bootstrap = 1000;
  double tol = 1e-4;
  bool iid_control = true;
};

inline Json to_json(const EiSpec& s, std::int64_t L) {
  return Json{{"model", to_json(s.model)}, {"n", s.n},           {"replicates", s.replicates},
              {"seed", s.seed},             {"truncation", to_json(s.truncation, L)},
              {"levels", s.levels},         {"bootstrap", s.bootstrap}, {"tol", s.tol},
              {"iid_control", s.iid_control}};
}

inline EiSpec ei_from_json(const Json& j) {
  detail::reject_unknown(
      j, {"model", "n", "replicates", "seed", "truncation", "levels", "bootstrap", "tol", "iid_control"},
      "ei config");
  EiSpec s;
  s.model = model_from_json(detail::required<Json>(j, "model"));
  s.n = detail::required<std::int64_t>(j, "n");
  s.replicates = detail::required<std::int64_t>(j, "replicates");
  s.seed = detail::required<std::uint64_t>(j, "seed");
  s.truncation = truncation_from_json(detail::required<Json>(j, "truncation"));
  s.levels = detail::required<std::vector<double>>(j, "levels");
  s.bootstrap = detail::required<int>(j, "bootstrap");
  s.tol = detail::required<double>(j, "tol");
  s.iid_control = detail::required<bool>(j, "iid_control");
  return s;
}

inline void push_ei_records(ExperimentManifest& m, const std::string& prefix, const EIEstimate& est) {
  for (std::size_t i = 0; i < est.levels.size(); ++i)
    m.results.push_back({prefix + "_level_" + std::to_string(est.levels[i]), est.theta_hat[i],
                         std::array{est.theta_hat[i] - 2 * est.std_error[i], est.theta_hat[i] + 2 * est.std_error[i]},
                         std::nullopt, Verdict::Diagnostic, "P_hat = " + std::to_string(est.p_hat[i])});
  for (const double x : est.dropped_levels)
    m.results.push_back(detail::diagnostic(prefix + "_dropped_level", x, "P_hat in {0,1}"));
}

/// Block maxima of n-site paths against exp(−θ x^{−α}), with an i.i.d. control
/// built by permuting replicates independently at every site.
inline std::int64_t resolved_truncation(const EiSpec& s) {
  return s.truncation.resolve(s.model.params, s.model.law(), s.n);
}

inline Json config_json(const EiSpec& s) { return to_json(s, resolved_truncation(s)); }

inline ExperimentManifest run_ei(const EiSpec& spec, const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  const auto law = spec.model.law();
  const auto& params = spec.model.params;
  detail::require_subcritical(params, "ei");
  if (spec.n < 2) throw DomainError("ei: n must be >= 2");
  const std::int64_t L = resolved_truncation(spec);
  auto m = detail::start_manifest("ei", to_json(spec, L));
  const auto consts = extremal_index(params, law, {spec.tol});
  const double bn = normalizer_b(params, static_cast<double>(spec.n));
  const PathSimulator sim({params, spec.n, L, spec.seed}, law);
  const std::int64_t R = spec.replicates;

  std::vector<SitePermutation> perms;
  if (spec.iid_control)
    for (std::int64_t k = 1; k <= spec.n; ++k) perms.emplace_back(R, spec.seed, k);
  std::vector<double> maxima(static_cast<std::size_t>(R));
  const double lowest = -std::numeric_limits<double>::infinity();
  auto states = for_each_replicate(
      sim, R, [&] { return std::vector<double>(spec.iid_control ? static_cast<std::size_t>(R) : 0, lowest); },
      [&](std::vector<double>& control, std::int64_t r, std::span<const double> v, std::span<const std::int32_t>) {
        double mx = lowest;
        for (std::int64_t k = 1; k <= spec.n; ++k) mx = std::max(mx, v[static_cast<std::size_t>(k)]);
        maxima[static_cast<std::size_t>(r)] = mx;
        if (!spec.iid_control) return;
        for (std::int64_t k = 1; k <= spec.n; ++k) {
          auto& slot = control[static_cast<std::size_t>(perms[static_cast<std::size_t>(k - 1)](r))];
          slot = std::max(slot, v[static_cast<std::size_t>(k)]);
        }
      });

  const double target = consts.theta;
  const auto est = estimate_extremal_index(maxima, spec.n, bn, params.alpha, spec.levels, spec.bootstrap,
                                           mix64(spec.seed ^ 0xB00757A9ULL));
  const bool within = std::abs(est.pooled - target) <= 0.15 * target ||
                      (est.ci_lower <= target && target <= est.ci_upper);
  m.results.push_back(detail::diagnostic("b_n", bn, "(n log^(p-1) n / (2 p! (p-1)!))^(1/alpha)"));
  m.results.push_back(detail::diagnostic("truncation_bound", sim.truncation_bound()));
  m.results.push_back({"candidate_index", consts.q_Fp->value(), std::array{consts.q_Fp->lower, consts.q_Fp->upper},
                       std::nullopt, Verdict::Diagnostic, "bracket for (sum u(n)^p)^-1"});
  m.results.push_back({"theta_pooled", est.pooled, std::array{est.ci_lower, est.ci_upper}, target, pass_if(within),
                       "target D*q; pass within the wider of 15% and the 95% bootstrap CI"});
  push_ei_records(m, "theta", est);
  if (spec.iid_control) {
    std::vector<double> control(static_cast<std::size_t>(R), lowest);
    for (const auto& s : states)
      for (std::size_t i = 0; i < control.size(); ++i) control[i] = std::max(control[i], s[i]);
    const auto ctl = estimate_extremal_index(control, spec.n, bn, params.alpha, spec.levels, spec.bootstrap,
                                             mix64(spec.seed ^ 0xC0471201ULL));
    m.results.push_back({"theta_iid_control", ctl.pooled, std::array{ctl.ci_lower, ctl.ci_upper}, 1.0,
                         pass_if(std::abs(ctl.pooled - 1.0) <= 0.1), "sites decoupled across replicates; pass within 10%"});
    push_ei_records(m, "theta_iid", ctl);
  }
  detail::finish_manifest(m, out_dir);
  return m;
}

// ---------------------------------------------------------------- clusters

struct ClusterSpec {
  ModelSpec model;
  std::uint64_t seed = 42;
  std::int64_t samples = 100000;
  std::int64_t horizon = std::int64_t{1} << 22;
  double tol = 1e-4;
  std::int64_t n_max = std::int64_t{1} << 20;
  /// Path route; 0 skips it.
  std::int64_t path_replicates = 2000;
  std::int64_t path_window = 2000;
  TruncationRule truncation{"target", 0.01};
  double level_eta = 1.0;
};

inline Json to_json(const ClusterSpec& s, std::int64_t L) {
  return Json{{"model", to_json(s.model)},
              {"seed", s.seed},
              {"samples", s.samples},
              {"horizon", s.horizon},
              {"tol", s.tol},
              {"n_max", s.n_max},
              {"path_replicates", s.path_replicates},
              {"path_window", s.path_window},
              {"truncation", to_json(s.truncation, L)},
              {"level_eta", s.level_eta}};
}

inline ClusterSpec cluster_from_json(const Json& j) {
  detail::reject_unknown(j,
                         {"model", "seed", "samples", "horizon", "tol", "n_max", "path_replicates", "path_window",
                          "truncation", "level_eta"},
                         "cluster config");
  ClusterSpec s;
  s.model = model_from_json(detail::required<Json>(j, "model"));
  s.seed = detail::required<std::uint64_t>(j, "seed");
  s.samples = detail::required<std::int64_t>(j, "samples");
  s.horizon = detail::required<std::int64_t>(j, "horizon");
  s.tol = detail::required<double>(j, "tol");
  s.n_max = detail::required<std::int64_t>(j, "n_max");
  s.path_replicates = detail::required<std::int64_t>(j, "path_replicates");
  s.path_window = detail::required<std::int64_t>(j, "path_window");
  s.truncation = truncation_from_json(detail::required<Json>(j, "truncation"));
  s.level_eta = detail::required<double>(j, "level_eta");
  return s;
}

/// 𝔮 two ways: the renewal-mass series bracket, and 1 / mean of simulated
/// geometric cluster sizes |η ∩ {0..H}|. Optionally also clusters of the paths.
inline std::int64_t resolved_truncation(const ClusterSpec& s) {
  return s.path_replicates > 0 ? s.truncation.resolve(s.model.params, s.model.law(), s.path_window) : 0;
}

inline Json config_json(const ClusterSpec& s) { return to_json(s, resolved_truncation(s)); }

inline ExperimentManifest run_cluster(const ClusterSpec& spec,
                                      const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  const auto law = spec.model.law();
  const auto& params = spec.model.params;
  detail::require_subcritical(params, "cluster");
  const std::int64_t L = resolved_truncation(spec);
  auto m = detail::start_manifest("cluster", to_json(spec, L));
  const auto q = candidate_extremal_index(law, params.p, {spec.tol, std::int64_t{1} << 12, spec.n_max});
  m.results.push_back({"candidate_index", q.value(), std::array{q.lower, q.upper}, std::nullopt, Verdict::Diagnostic,
                       "terms summed: " + std::to_string(q.terms)});
  m.results.push_back({"candidate_bracket_width", q.width(), std::nullopt, spec.tol, pass_if(q.reached_tolerance),
                       "upper minus lower bracket"});

  const auto sizes = sample_intersection_counts(law, params.p, spec.horizon, spec.samples, spec.seed);
  const auto fit = fit_geometric(sizes);
  const double target = 1.0 / q.value();
  const double slack = 3 * fit.se_mean + 0.5 * (1.0 / q.lower - 1.0 / q.upper);
  m.results.push_back({"cluster_mean_intersection", fit.mean, std::array{fit.mean - 3 * fit.se_mean, fit.mean + 3 * fit.se_mean},
                       target, pass_if(std::abs(fit.mean - target) <= slack),
                       "mean of |eta on [0,H]| vs 1/q within 3 sigma"});
  m.results.push_back(detail::diagnostic("geometric_q_hat", fit.q_hat, "MLE 1/mean", q.value()));

  if (spec.path_replicates > 0) {
    const double bn = normalizer_b(params, static_cast<double>(spec.path_window));
    const auto r_n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(0.5 * std::log(bn))));
    const PathSimulator sim({params, spec.path_window, L, spec.seed ^ 0x5A5A5A5AULL}, law);
    const auto paths = simulate_columns(sim, spec.path_replicates, 0, spec.path_window + 1);
    try {
      const auto est = estimate_cluster_law(paths, r_n, bn * spec.level_eta);
      m.results.push_back(detail::diagnostic("path_block_length", static_cast<double>(r_n)));
      m.results.push_back(detail::diagnostic("path_clusters", static_cast<double>(est.blocks)));
      m.results.push_back(detail::diagnostic("path_cluster_mean", est.fit.mean,
                                             "blocks of r_n sites are short, so large clusters are cut", target));
      m.results.push_back(detail::diagnostic("path_common_sign", est.common_sign_frequency, {}, 1.0));
      m.results.push_back(detail::diagnostic("path_positive_fraction", est.positive_frequency, {}, 0.5));
    } catch (const InsufficientDataError& e) {
      m.results.push_back(detail::diagnostic("path_clusters", 0.0, e.what()));
    }
  }
  detail::finish_manifest(m, out_dir);
  return m;
}

// ---------------------------------------------------------------- anti-clustering

struct AnticlusterSpec {
  ModelSpec model;
  std::int64_t n = 10000;
  double eta = 0.5;
  /// Half-width of the lag window; ≤ 0 means floor(0.5 log b_n).
  std::int64_t r = 0;
  std::int64_t replicates = 400000;
  std::uint64_t seed = 42;
  TruncationRule truncation{"per-site", 20.0};
  std::vector<std::int64_t> ells{1, 2, 3, 5, 10, 20};
};

inline std::int64_t anticluster_radius(const AnticlusterSpec& s) {
  if (s.r > 0) return s.r;
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(0.5 * std::log(normalizer_b(s.model.params, static_cast<double>(s.n))))));
}

inline Json to_json(const AnticlusterSpec& s, std::int64_t L) {
  return Json{{"model", to_json(s.model)}, {"n", s.n},       {"eta", s.eta},   {"r", s.r},
              {"replicates", s.replicates}, {"seed", s.seed}, {"truncation", to_json(s.truncation, L)},
              {"ells", s.ells}};
}

inline AnticlusterSpec anticluster_from_json(const Json& j) {
  detail::reject_unknown(j, {"model", "n", "eta", "r", "replicates", "seed", "truncation", "ells"},
                         "anticluster config");
  AnticlusterSpec s;
  s.model = model_from_json(detail::required<Json>(j, "model"));
  s.n = detail::required<std::int64_t>(j, "n");
  s.eta = detail::required<double>(j, "eta");
  s.r = detail::required<std::int64_t>(j, "r");
  s.replicates = detail::required<std::int64_t>(j, "replicates");
  s.seed = detail::required<std::uint64_t>(j, "seed");
  s.truncation = truncation_from_json(detail::required<Json>(j, "truncation"));
  s.ells = detail::required<std::vector<std::int64_t>>(j, "ells");
  return s;
}

/// P(max_{ℓ≤|k|≤r} |X_k| > b_n η | |X_0| > b_n η) on centered windows of 2r+1 sites.
inline std::int64_t resolved_truncation(const AnticlusterSpec& s) {
  return s.truncation.resolve(s.model.params, s.model.law(), std::max<std::int64_t>(2 * anticluster_radius(s), 2));
}

inline Json config_json(const AnticlusterSpec& s) { return to_json(s, resolved_truncation(s)); }

inline ExperimentManifest run_anticluster(const AnticlusterSpec& spec,
                                          const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  const auto law = spec.model.law();
  const auto& params = spec.model.params;
  detail::require_subcritical(params, "anticluster");
  if (!(spec.eta > 0.0)) throw DomainError("anticluster: eta must be positive");
  const std::int64_t r = anticluster_radius(spec);
  const std::int64_t window = 2 * r;
  const std::int64_t L = resolved_truncation(spec);
  auto m = detail::start_manifest("anticluster", to_json(spec, L));
  const double threshold = normalizer_b(params, static_cast<double>(spec.n)) * spec.eta;
  const PathSimulator sim({params, window, L, spec.seed}, law);
  std::vector<std::int64_t> reach(static_cast<std::size_t>(spec.replicates));
  for_each_replicate(
      sim, spec.replicates, [] { return 0; },
      [&](int&, std::int64_t i, std::span<const double> v, std::span<const std::int32_t>) {
        reach[static_cast<std::size_t>(i)] = exceedance_reach(v, threshold);
      });
  const auto curve = anti_clustering_from_reach(reach, r, threshold, spec.ells);
  m.results.push_back(detail::diagnostic("r_n", static_cast<double>(r)));
  m.results.push_back(detail::diagnostic("threshold", threshold, "b_n * eta"));
  m.results.push_back(detail::diagnostic("exceedances", static_cast<double>(curve.exceedances)));
  bool monotone = true;
  for (std::size_t i = 0; i < curve.ell.size(); ++i) {
    if (i > 0 && curve.probability[i] > curve.probability[i - 1]) monotone = false;
    m.results.push_back(detail::diagnostic("curve_ell_" + std::to_string(curve.ell[i]), curve.probability[i],
                                           curve.ell[i] > r ? "ell > r: empty lag set" : ""));
  }
  m.results.push_back({"curve_nonincreasing", monotone ? 1.0 : 0.0, std::nullopt, 1.0, pass_if(monotone), ""});
  for (std::size_t i = 0; i < curve.ell.size(); ++i) {
    if (curve.ell[i] != 20) continue;
    const double v = curve.probability[i];
    m.results.push_back({"curve_at_ell_20", v, std::array{0.0, 0.1}, 0.0, pass_if(v < 0.1),
                         curve.ell[i] > r ? "vacuous: 20 exceeds r_n = " + std::to_string(r) : "below 0.1"});
  }
  detail::finish_manifest(m, out_dir);
  return m;
}

// ---------------------------------------------------------------- theory report

inline Json theory_report(const ModelSpec& model, const CandidateOptions& options) {
  const auto& params = model.params;
  const auto law = model.law();
  const auto regime = classify_regime(params);
  Json j;
  j["model"] = to_json(model);
  j["regime"] = {{"beta_p", regime.beta_p}, {"regime", to_string(regime.regime)}, {"q_beta_p", *regime.q_beta_p}};
  const auto c = extremal_index(params, law, options);
  Json ec;
  if (c.q_Fp) {
    ec["q_Fp"] = {{"lower", c.q_Fp->lower},
                  {"upper", c.q_Fp->upper},
                  {"value", c.q_Fp->value()},
                  {"terms", c.q_Fp->terms},
                  {"reached_tolerance", c.q_Fp->reached_tolerance}};
    ec["D"] = *c.D;
    ec["D_alternating"] = shape_D_alternating(params.beta, params.p);
    ec["D_irwin_hall"] = shape_D_irwin_hall(params.beta, params.p);
  } else {
    ec["q_Fp"] = nullptr;
    ec["D"] = nullptr;
  }
  ec["theta"] = c.theta;
  ec["vartheta"] = c.vartheta;
  j["extremal"] = ec;
  Json norm = Json::object();
  for (const double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    Json row{{"n", n}, {"b_n", normalizer_b(params, n)}};
    if (regime.regime == Regime::Critical) row["b_n_critical"] = normalizer_b_critical(params, n);
    norm[std::to_string(static_cast<long long>(n))] = row;
  }
  j["normalizers"] = norm;
  j["window_weight"] = {{"m=1000", window_weight(law, 1000)}};
  return j;
}

// ---------------------------------------------------------------- dispatch

/// Re-runs an experiment from a manifest's kind and config.
inline ExperimentManifest run_from_config(const std::string& kind, const Json& config,
                                          const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  try {
    if (kind == "simulate") return run_simulate(simulate_from_json(config), out_dir);
    if (kind == "tailproc") return run_tailproc(tailproc_from_json(config), out_dir);
    if (kind == "ei") return run_ei(ei_from_json(config), out_dir);
    if (kind == "cluster") return run_cluster(cluster_from_json(config), out_dir);
    if (kind == "anticluster") return run_anticluster(anticluster_from_json(config), out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  throw SchemaError("unknown experiment kind '" + kind + "'");
}

}  // namespace srms
