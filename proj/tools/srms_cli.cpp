// srms: command-line runner for the theory report, simulations and estimators.
//
// Exit codes: 0 ok, 1 I/O or internal error, 2 bad usage or malformed
// manifest, 3 domain error, 4 a failed verdict under --strict.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srms/srms.hpp"
#include "srms/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitStrict = 4;

struct ModelFlags {
  double alpha = 1.0;
  std::string beta = "1/4";
  int p = 2;
  std::string family = "shifted-pareto";
  double scale = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "Frechet tail index alpha > 0")->capture_default_str();
    app->add_option("--beta", beta, "renewal tail index, decimal or ratio such as 1/2")->capture_default_str();
    app->add_option("--p", p, "product order p >= 1")->capture_default_str();
    app->add_option("--family", family, "inter-renewal family")
        ->check(CLI::IsMember({"shifted-pareto", "lomax"}))
        ->capture_default_str();
    app->add_option("--scale", scale, "Lomax scale")->capture_default_str();
  }
  srms::ModelSpec spec() const {
    srms::ModelSpec m;
    m.params = srms::ModelParams::parse(alpha, beta, p);
    m.family = family;
    m.scale = scale;
    return m;
  }
};

struct TruncationFlags {
  std::optional<double> fixed;
  std::string rule;
  std::optional<double> value;

  void attach(CLI::App* app) {
    app->add_option("--truncation", fixed, "fixed number of series terms L");
    app->add_option("--truncation-rule", rule, "default | target | per-site | fixed")
        ->check(CLI::IsMember({"default", "target", "per-site", "fixed"}));
    app->add_option("--truncation-value", value, "parameter of the truncation rule");
  }
  void apply(srms::TruncationRule& t) const {
    if (fixed) {
      t = {"fixed", *fixed};
      return;
    }
    if (!rule.empty()) t.rule = rule;
    if (value) t.value = *value;
  }
};

struct CommonFlags {
  std::string out;
  std::string from_manifest;
  bool strict = false;

  void attach(CLI::App* app) {
    app->add_option("--out", out, "output directory (default $SRMS_OUTPUT_DIR/<experiment id>)");
    app->add_option("--from-manifest", from_manifest, "re-run the experiment recorded in a manifest")
        ->check(CLI::ExistingFile);
    app->add_flag("--strict", strict, "exit 4 when any verdict fails");
  }
};

std::filesystem::path output_dir(const std::string& explicit_dir, const std::string& id) {
  if (!explicit_dir.empty()) return explicit_dir;
  const char* env = std::getenv("SRMS_OUTPUT_DIR");
  return std::filesystem::path(env && *env ? env : "srms-output") / id;
}

void print_summary(const srms::ExperimentManifest& m, const std::filesystem::path& dir) {
  for (const auto& r : m.results) {
    std::cout << srms::to_string(r.verdict) << '\t' << r.name << '\t' << r.estimate;
    if (r.target) std::cout << "\ttarget " << *r.target;
    if (r.ci) std::cout << "\tci [" << (*r.ci)[0] << ", " << (*r.ci)[1] << ']';
    if (!r.detail.empty()) std::cout << '\t' << r.detail;
    std::cout << '\n';
  }
  std::cout << "manifest\t" << (dir / "manifest.json").string() << '\n';
}

/// Runs one experiment kind. The id is derived from the config before running,
/// so the default output directory is known up front.
template <class Spec, class Run>
int run_experiment(const std::string& kind, const Spec& spec, const CommonFlags& common, Run&& run) {
  srms::ExperimentManifest m;
  std::filesystem::path dir;
  if (!common.from_manifest.empty()) {
    const auto old = srms::load_manifest(common.from_manifest);
    if (old.kind != kind)
      throw srms::SchemaError("manifest records a '" + old.kind + "' experiment, not '" + kind + "'");
    dir = output_dir(common.out, old.experiment_id);
    m = srms::run_from_config(kind, old.config, dir);
  } else {
    dir = output_dir(common.out, srms::experiment_id(kind, srms::config_json(spec)));
    m = run(spec, dir);
  }
  print_summary(m, dir);
  return common.strict && !m.all_passed() ? kExitStrict : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renewal-driven stable moving-sum series: theory, simulation and extremes"};
  app.set_version_flag("--version", std::string(srms::kVersion));
  app.require_subcommand(1);

  int status = kExitOk;
  ModelFlags model;
  TruncationFlags trunc;
  CommonFlags common;

  // theory
  double theory_tol = 1e-4;
  std::int64_t theory_nmax = std::int64_t{1} << 20;
  auto* theory = app.add_subcommand("theory", "regime, extremal constants and normalizers as JSON");
  model.attach(theory);
  theory->add_option("--tol", theory_tol, "bracket width for the candidate extremal index")->capture_default_str();
  theory->add_option("--n-max", theory_nmax, "largest renewal table size")->capture_default_str();
  theory->callback([&] {
    srms::CandidateOptions opt;
    opt.tol = theory_tol;
    opt.n_max = theory_nmax;
    std::cout << srms::theory_report(model.spec(), opt).dump(2) << '\n';
  });

  // simulate
  srms::SimulateSpec sim;
  auto* simulate = app.add_subcommand("simulate", "sample paths X_0..X_m; writes paths.csv and manifest.json");
  model.attach(simulate);
  trunc.attach(simulate);
  common.attach(simulate);
  simulate->add_option("--window", sim.window, "window length m")->capture_default_str();
  simulate->add_option("--replicates", sim.replicates, "independent paths")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate->callback([&] {
    sim.model = model.spec();
    trunc.apply(sim.truncation);
    status = run_experiment(
        "simulate", sim, common,
        [](const srms::SimulateSpec& s, const std::filesystem::path& d) { return srms::run_simulate(s, d); });
  });

  // tailproc
  srms::TailprocSpec tp;
  auto* tailproc = app.add_subcommand("tailproc", "spectral tail process on the lag grid");
  model.attach(tailproc);
  trunc.attach(tailproc);
  common.attach(tailproc);
  tailproc->add_option("--window", tp.window, "window length m")->capture_default_str();
  tailproc->add_option("--replicates", tp.replicates, "independent paths")->capture_default_str();
  tailproc->add_option("--seed", tp.seed, "master seed")->capture_default_str();
  tailproc->add_option("--quantile", tp.quantile, "conditioning quantile level")->capture_default_str();
  tailproc->add_option("--delta", tp.delta, "half-width of the +-1 bins")->capture_default_str();
  tailproc->add_option("--max-lag", tp.max_lag, "largest lag")->capture_default_str();
  tailproc->callback([&] {
    tp.model = model.spec();
    trunc.apply(tp.truncation);
    status = run_experiment(
        "tailproc", tp, common,
        [](const srms::TailprocSpec& s, const std::filesystem::path& d) { return srms::run_tailproc(s, d); });
  });

  // ei
  srms::EiSpec ei;
  auto* eic = app.add_subcommand("ei", "extremal index from block maxima");
  model.attach(eic);
  trunc.attach(eic);
  common.attach(eic);
  eic->add_option("--window", ei.n, "block length n")->capture_default_str();
  eic->add_option("--replicates", ei.replicates, "independent blocks")->capture_default_str();
  eic->add_option("--seed", ei.seed, "master seed")->capture_default_str();
  eic->add_option("--levels", ei.levels, "levels x for P(M_n <= b_n x), comma separated")->delimiter(',');
  eic->add_option("--bootstrap", ei.bootstrap, "bootstrap resamples")->capture_default_str();
  eic->add_option("--tol", ei.tol, "bracket width for the candidate index")->capture_default_str();
  bool no_iid = false;
  eic->add_flag("--no-iid-control", no_iid, "skip the site-permuted control");
  eic->callback([&] {
    ei.model = model.spec();
    ei.iid_control = !no_iid;
    trunc.apply(ei.truncation);
    status = run_experiment(
        "ei", ei, common,
        [](const srms::EiSpec& s, const std::filesystem::path& d) { return srms::run_ei(s, d); });
  });

  // cluster
  srms::ClusterSpec cl;
  auto* cluster = app.add_subcommand("cluster", "cluster size law against the candidate index");
  model.attach(cluster);
  trunc.attach(cluster);
  common.attach(cluster);
  cluster->add_option("--samples", cl.samples, "intersection samples")->capture_default_str();
  cluster->add_option("--horizon", cl.horizon, "intersection horizon")->capture_default_str();
  cluster->add_option("--seed", cl.seed, "master seed")->capture_default_str();
  cluster->add_option("--tol", cl.tol, "bracket width for the candidate index")->capture_default_str();
  cluster->add_option("--replicates", cl.path_replicates, "path replicates for blocked clusters (0 skips)")
      ->capture_default_str();
  cluster->add_option("--window", cl.path_window, "path length for blocked clusters")->capture_default_str();
  cluster->callback([&] {
    cl.model = model.spec();
    trunc.apply(cl.truncation);
    status = run_experiment(
        "cluster", cl, common,
        [](const srms::ClusterSpec& s, const std::filesystem::path& d) { return srms::run_cluster(s, d); });
  });

  // anticluster
  srms::AnticlusterSpec ac;
  auto* anticluster = app.add_subcommand("anticluster", "anti-clustering curve in the lag cut-off");
  model.attach(anticluster);
  trunc.attach(anticluster);
  common.attach(anticluster);
  anticluster->add_option("--n", ac.n, "sample size n fixing b_n")->capture_default_str();
  anticluster->add_option("--eta", ac.eta, "exceedance level as a multiple of b_n")->capture_default_str();
  anticluster->add_option("--radius", ac.r, "lag window half-width r (0 = floor(0.5 log b_n))")
      ->capture_default_str();
  anticluster->add_option("--replicates", ac.replicates, "independent paths")->capture_default_str();
  anticluster->add_option("--seed", ac.seed, "master seed")->capture_default_str();
  anticluster->add_option("--ells", ac.ells, "cut-offs l, comma separated")->delimiter(',');
  anticluster->callback([&] {
    ac.model = model.spec();
    trunc.apply(ac.truncation);
    status = run_experiment(
        "anticluster", ac, common,
        [](const srms::AnticlusterSpec& s, const std::filesystem::path& d) { return srms::run_anticluster(s, d); });
  });

  // selftest
  double selftest_scale = 0.2;
  bool selftest_strict = false;
  auto* selftest = app.add_subcommand("selftest", "property suite at reduced scale");
  selftest->add_option("--scale", selftest_scale, "multiplier on Monte Carlo sizes")->capture_default_str();
  selftest->add_flag("--strict", selftest_strict, "exit 4 when any check fails");
  selftest->callback([&] {
    bool all = true;
    for (const auto& c : srms::run_selftest(selftest_scale)) {
      std::cout << (c.ok ? "pass" : "fail") << '\t' << c.name << '\t' << c.detail << '\n';
      all = all && c.ok;
    }
    if (selftest_strict && !all) status = kExitStrict;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const srms::SchemaError& e) {
    std::cerr << "srms: " << e.what() << '\n';
    return kExitUsage;
  } catch (const srms::DomainError& e) {
    std::cerr << "srms: domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const srms::InsufficientDataError& e) {
    std::cerr << "srms: domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "srms: " << e.what() << '\n';
    return kExitIo;
  }
  return status;
}
