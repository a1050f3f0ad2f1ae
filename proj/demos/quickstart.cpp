// Theory constants for the default model, then a short simulation and the
// empirical tail of X_0 against its asymptote.

#include <cstdio>

#include "srms/srms.hpp"

int main() {
  const srms::ModelParams params = srms::ModelParams::parse(1.0, "1/4", 2);
  const auto law = srms::InterRenewalLaw::shifted_pareto(params.beta);

  const auto regime = srms::classify_regime(params);
  std::printf("regime %s, beta_p = %g\n", srms::to_string(regime.regime).c_str(), regime.beta_p);

  srms::CandidateOptions opt;
  opt.tol = 1e-3;
  const auto c = srms::extremal_index(params, law, opt);
  std::printf("D = %.6f, candidate index in [%.6f, %.6f], theta = %.6f\n", *c.D, c.q_Fp->lower, c.q_Fp->upper,
              c.theta);

  const std::int64_t m = 200;
  const srms::SeriesConfig config{params, m, srms::truncation_for_target(params, law, m, 0.01), 42};
  const srms::PathSimulator sim(config, law);
  const auto x0 = srms::simulate_columns(sim, 20000, 0, 1).column(0);
  const auto report = srms::marginal_tail_report(x0, params);
  std::printf("L = %lld, tail slope %.3f (asymptotic -alpha = %.1f)\n", static_cast<long long>(config.truncation),
              report.slope, -params.alpha);
  for (std::size_t i = 0; i < report.x.size(); ++i)
    std::printf("  P(|X| > %10.1f): empirical %.3e, asymptote %.3e\n", report.x[i], report.survival[i],
                report.asymptote[i]);
}
