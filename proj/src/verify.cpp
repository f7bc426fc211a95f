#include "postsel/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "postsel/ks.hpp"
#include "postsel/normal.hpp"
#include "postsel/report.hpp"
#include "postsel/size_analysis.hpp"

namespace postsel {

namespace {

class Suite {
 public:
  void add(std::string name, bool ok, double value, double tolerance, std::string detail = {}) {
    report_.checks.push_back({std::move(name), ok ? CheckStatus::Pass : CheckStatus::Fail, value,
                              tolerance, std::move(detail)});
  }
  void skip(std::string name, std::string why) {
    report_.checks.push_back({std::move(name), CheckStatus::Skip, 0.0, 0.0, std::move(why)});
  }
  // Runs body, turning any exception into a failed check.
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::nan(""), 0.0, std::string("error: ") + e.what());
    }
  }
  VerifyReport take() { return std::move(report_); }

 private:
  VerifyReport report_;
};

constexpr double kLevelTol = 1e-5;

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "PASS";
    case CheckStatus::Fail:
      return "FAIL";
    case CheckStatus::Skip:
      break;
  }
  return "SKIP";
}

bool VerifyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

VerifyReport run_verification(const VerifyConfig& cfg, GridStore& store) {
  Suite suite;
  const ModelParams params(cfg.rho, cfg.cutoff);
  const Probability delta(cfg.delta);
  const bool theorem_range = cfg.rho != 0.0 && cfg.delta <= 0.5;
  const std::string theorem_skip =
      !cfg.theorem_checks ? "theorem checks disabled"
                          : (cfg.rho == 0.0 ? "rho = 0: no nuisance dependence"
                                            : "delta > 1/2 is outside the proven range");
  const bool run_theorem = cfg.theorem_checks && theorem_range;
  const std::vector<double> probe_gammas{0.0, 1.0, -1.0, 5.0, -5.0, 20.0, -20.0};

  suite.guarded("density-normalization", [&] {
    double worst = 0.0;
    for (double g : probe_gammas) {
      const TStatDistribution d(params, GammaParam(g));
      worst = std::max(worst, std::abs(d.mass(-d.truncation(), d.truncation()) - 1.0));
    }
    suite.add("density-normalization", worst <= 1e-8, worst, 1e-8);
  });

  suite.guarded("cdf-tails", [&] {
    double worst = 0.0;
    for (double g : probe_gammas) {
      const TStatDistribution d(params, GammaParam(g));
      worst = std::max({worst, 1.0 - d.cdf(20.0), d.cdf(-20.0)});
    }
    suite.add("cdf-tails", worst <= 1e-9, worst, 1e-9);
  });

  suite.guarded("quantile-limits", [&] {
    double worst = 0.0;
    for (double v : {cfg.delta, 0.5}) {
      for (double g : {-30.0, 30.0}) {
        const double q = quantile(params, GammaParam(g), Probability(v));
        worst = std::max(worst, std::abs(q + std_normal_quantile(v)));
      }
    }
    suite.add("quantile-limits", worst <= 1e-4, worst, 1e-4);
  });

  suite.guarded("symmetry", [&] {
    const ModelParams mirrored(-cfg.rho, cfg.cutoff);
    double worst = 0.0;
    for (double g : {-2.0, 0.0, 2.0}) {
      const double q = quantile(params, GammaParam(g), delta);
      worst = std::max(worst, std::abs(q - quantile(mirrored, GammaParam(-g), delta)));
      const double lower = quantile(mirrored, GammaParam(g), Probability(1.0 - cfg.delta));
      worst = std::max(worst, std::abs(q + lower));
    }
    suite.add("symmetry", worst <= 1e-7, worst, 1e-7);
  });

  const auto sup_rule = prepare_rule(CriticalValueRule::fixed_sup(cfg.delta), params, store);
  const auto gammas = default_size_gammas();

  if (run_theorem) {
    const double excess = sup_rule.sup().c_sup + std_normal_quantile(cfg.delta);
    suite.add("sup-exceedance", excess > 1e-4, excess, 1e-4,
              "c_sup - Phi^-1(1 - delta) at gamma_max = " + format_number(sup_rule.sup().gamma_max));
  } else {
    suite.skip("sup-exceedance", theorem_skip);
  }

  suite.guarded("fixed-sup-level", [&] {
    const auto rep = max_size(sup_rule, gammas);
    const double at_max = rejection_prob_semianalytic(sup_rule, GammaParam(sup_rule.sup().gamma_max));
    const bool ok = rep.max_size <= cfg.delta + kLevelTol && std::abs(at_max - cfg.delta) <= kLevelTol;
    suite.add("fixed-sup-level", ok, rep.max_size - cfg.delta, kLevelTol,
              "size at gamma_max = " + format_number(at_max));
  });

  suite.guarded("loh-level-floor", [&] {
    const auto rule = prepare_rule(CriticalValueRule::loh(cfg.delta, cfg.eta), params, store);
    const auto rep = max_size(rule, gammas);
    const bool ok = rep.max_size <= cfg.delta + kLevelTol &&
                    rep.max_size >= cfg.delta - cfg.eta - kLevelTol;
    suite.add("loh-level-floor", ok, rep.max_size, kLevelTol,
              "max size must lie in [delta - eta, delta]");
  });

  const auto boot = prepare_rule(CriticalValueRule::bootstrap(cfg.delta), params, store);
  std::optional<SizeReport> boot_report;
  if (run_theorem) {
    suite.guarded("bootstrap-overshoot", [&] {
      boot_report = max_size(boot, gammas);
      suite.add("bootstrap-overshoot", boot_report->verdict == LevelVerdict::Overshoots,
                boot_report->max_size - cfg.delta, 3.0 * boot_report->error_budget,
                "max size " + format_number(boot_report->max_size) + " at gamma " +
                    format_number(boot_report->argmax_gamma));
    });

    const double reduced_quantile = -std_normal_quantile(cfg.delta - cfg.eta);
    if (reduced_quantile < sup_rule.sup().c_sup - 1e-6) {
      suite.guarded("min-rule-overshoot", [&] {
        const auto rule = prepare_rule(CriticalValueRule::min_rule(cfg.delta, cfg.eta), params, store);
        const auto rep = max_size(rule, gammas);
        suite.add("min-rule-overshoot", rep.verdict == LevelVerdict::Overshoots,
                  rep.max_size - cfg.delta, 3.0 * rep.error_budget);
      });
    } else {
      suite.skip("min-rule-overshoot", "eta too large: Phi^-1(1 - (delta - eta)) >= c_sup(delta)");
    }
  } else {
    suite.skip("bootstrap-overshoot", theorem_skip);
    suite.skip("min-rule-overshoot", theorem_skip);
  }

  suite.guarded("mccloskey-dominance", [&] {
    const double second = 2.0 * cfg.eta < cfg.delta ? 2.0 * cfg.eta : 0.5 * cfg.eta;
    const auto mcc = prepare_rule(CriticalValueRule::mccloskey(cfg.delta, {cfg.eta, second}),
                                  params, store);
    const auto mr = prepare_rule(CriticalValueRule::min_rule(cfg.delta, cfg.eta), params, store);
    const auto coarse = default_size_gammas(kSupSearchBound, 0.5);
    const auto a = size_curve(mcc, coarse);
    const auto b = size_curve(mr, coarse);
    double worst = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      worst = std::max(worst, b.rejection[i] - a.rejection[i]);
    }
    suite.add("mccloskey-dominance", worst <= 1e-8, worst, 1e-8,
              "largest amount by which min-rule size exceeds the McCloskey size");
  });

  suite.guarded("overshoot-decomposition", [&] {
    const auto dec = overshoot_decomposition(boot);
    const double gap = std::abs(dec.total - dec.direct);
    const bool positive = cfg.rho == 0.0 || dec.overshoot_term > 0.0;
    suite.add("overshoot-decomposition", dec.consistent && positive, gap, kRefineTol,
              "overshoot term = " + format_number(dec.overshoot_term));
  });

  suite.guarded("n-invariance", [&] {
    const bool ok = n_invariance_check(boot, 1.5);
    suite.add("n-invariance", ok, ok ? 0.0 : 1.0, 0.0);
  });

  suite.guarded("semi-analytic-vs-mc", [&] {
    const double g = boot_report ? boot_report->argmax_gamma : boot.sup().gamma_max;
    const double sa = rejection_prob_semianalytic(boot, GammaParam(g));
    const auto mc = rejection_prob_mc(boot, GammaParam(g), cfg.reps, cfg.seed);
    const double bound = 3.0 * mc.std_error + kSemiAnalyticTol;
    suite.add("semi-analytic-vs-mc", std::abs(sa - mc.rejection) <= bound,
              std::abs(sa - mc.rejection), bound,
              "semi-analytic " + format_number(sa) + ", MC " + format_number(mc.rejection));
  });

  suite.guarded("sampler-ks", [&] {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.reps, 200'000));
    const GammaParam g(sup_rule.sup().gamma_max);
    RngStream rng(cfg.seed, 0xC0FFEE);
    std::vector<double> draws(n);
    for (auto& t : draws) t = sample_tprime(params, g, rng).t;
    std::sort(draws.begin(), draws.end());
    const auto cdfs = TStatDistribution(params, g).cdf_sorted(draws);
    const double d = ks_statistic(cdfs);
    suite.add("sampler-ks", d <= ks_critical_001(n), d, ks_critical_001(n));
  });

  suite.guarded("rho-zero-degeneracy", [&] {
    const ModelParams flat(0.0, cfg.cutoff);
    const auto rule = prepare_rule(CriticalValueRule::bootstrap(cfg.delta), flat, store);
    const double crit_gap = std::abs(rule(3.0) + std_normal_quantile(cfg.delta));
    const double size_gap = std::abs(rejection_prob_semianalytic(rule, GammaParam(1.0)) - cfg.delta);
    suite.add("rho-zero-degeneracy", std::max(crit_gap, size_gap) <= 1e-6,
              std::max(crit_gap, size_gap), 1e-6);
  });

  return suite.take();
}

std::string format_verify_report(const VerifyReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << '[' << to_string(c.status) << "] " << c.name;
    if (c.status != CheckStatus::Skip) {
      out << "  value=" << format_number(c.value) << "  tol=" << format_number(c.tolerance);
    }
    if (!c.detail.empty()) out << "  (" << c.detail << ')';
    out << '\n';
  }
  out << (report.passed() ? "all checks passed\n" : "verification FAILED\n");
  return out.str();
}

}  // namespace postsel
