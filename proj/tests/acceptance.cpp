// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also has a wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "postsel/critical_values.hpp"
#include "postsel/distribution.hpp"
#include "postsel/grid_store.hpp"
#include "postsel/ks.hpp"
#include "postsel/normal.hpp"
#include "postsel/regression.hpp"
#include "postsel/report.hpp"
#include "postsel/size_analysis.hpp"

using namespace postsel;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs <= budget_s;
  const bool ok = out.ok && in_time;
  if (!ok) ++failures;
  std::printf("[%s] %2d %-28s %7.2fs/%gs  %s%s\n", ok ? "PASS" : "FAIL", id, name, secs, budget_s,
              out.detail.c_str(), in_time ? "" : "  (over time budget)");
  std::fflush(stdout);
}

std::string num(double x) { return format_number(x); }

GridStore& store() {
  static GridStore s;
  return s;
}

double ks_one_sample(const ModelParams& p, GammaParam g, std::vector<double> draws) {
  std::sort(draws.begin(), draws.end());
  return ks_statistic(TStatDistribution(p, g).cdf_sorted(draws));
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// c(0.001) * sqrt((n + m) / (n m))
double ks_two_sample_critical_001(std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(0.0005));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

std::vector<double> regression_draws(std::size_t n, double rho, double cutoff, double gamma,
                                     std::size_t reps, std::uint64_t seed) {
  const auto design = RegressionDesign::two_level(n, rho);
  const double beta = gamma * design.sigma_beta() / std::sqrt(static_cast<double>(n));
  RngStream rng(seed, n);
  std::vector<double> out(reps);
  for (auto& t : out) t = simulate_regression_tstat(design, cutoff, 1.0, 1.0, beta, rng);
  return out;
}

constexpr double kDelta = 0.05;
constexpr double kEta = 0.01;
constexpr double kBudget = 1e-5;

}  // namespace

int main() {
  const ModelParams main_model(0.7, 1.96);

  criterion(1, "density-normalization", 10, [] {
    double worst = 0.0;
    for (double rho : {-0.7, -0.3, 0.3, 0.7}) {
      for (double c : {1.0, 1.96}) {
        for (double g : {0.0, 1.0, -1.0, 5.0, -5.0, 20.0, -20.0}) {
          const TStatDistribution d(ModelParams(rho, c), GammaParam(g));
          worst = std::max(worst, std::abs(d.mass(-d.truncation(), d.truncation()) - 1.0));
        }
      }
    }
    return Outcome{worst <= 1e-8, "max |integral - 1| = " + num(worst) + " (tol 1e-8)"};
  });

  criterion(2, "sampler-density-ks", 60, [] {
    struct Case { double rho, c, gamma; };
    const Case cases[] = {{0.7, 1.96, -2.7}, {-0.5, 1.0, 0.5}, {0.3, 1.96, 3.0}, {0.9, 1.0, -1.0}};
    constexpr std::size_t kN = 1'000'000;
    double worst = 0.0;
    std::uint64_t stream = 0;
    for (const auto& k : cases) {
      const ModelParams p(k.rho, k.c);
      const GammaParam g(k.gamma);
      RngStream rng(2024, stream++);
      std::vector<double> draws(kN);
      for (auto& t : draws) t = sample_tprime(p, g, rng).t;
      worst = std::max(worst, ks_one_sample(p, g, std::move(draws)));
    }
    return Outcome{worst <= 1.95e-3, "max KS = " + num(worst) + " (crit 1.95e-3, n = 1e6)"};
  });

  criterion(3, "regression-oracle-n200", 120, [] {
    struct Case { double rho, c, gamma; };
    const Case cases[] = {{0.7, 1.96, -2.0}, {-0.4, 1.0, 1.0}};
    constexpr std::size_t kReps = 200'000;
    double worst_ratio = 0.0;
    std::string detail;
    for (const auto& k : cases) {
      const double d = ks_one_sample(ModelParams(k.rho, k.c), GammaParam(k.gamma),
                                     regression_draws(200, k.rho, k.c, k.gamma, kReps, 77));
      worst_ratio = std::max(worst_ratio, d / ks_critical_001(kReps));
      detail += "KS(rho=" + num(k.rho) + ") = " + num(d) + "  ";
    }
    return Outcome{worst_ratio <= 1.0, detail + "(crit " + num(ks_critical_001(kReps)) + ")"};
  });

  criterion(4, "quantile-limits", 5, [] {
    double worst = 0.0;
    for (double rho : {-0.7, 0.3, 0.7}) {
      const ModelParams p(rho, 1.96);
      for (double v : {0.05, 0.5}) {
        for (double g : {-30.0, 30.0}) {
          worst = std::max(worst, std::abs(quantile(p, GammaParam(g), Probability(v)) +
                                           std_normal_quantile(v)));
        }
      }
    }
    return Outcome{worst <= 1e-4, "max |cbar_{+-30}(v) - Phi^-1(1-v)| = " + num(worst)};
  });

  criterion(5, "sup-exceedance", 60, [] {
    bool ok = true;
    std::string detail;
    const double z = -std_normal_quantile(0.05);
    for (double rho : {0.3, 0.7}) {
      const ModelParams p(rho, 1.96);
      const auto sup = compute_sup(*store().get(p, Probability(0.05)));
      // Brute force: exact quantiles every 1e-3 on [-40, 40].
      double scan = -INFINITY;
      std::optional<double> hint;
      for (long i = -40000; i <= 40000; ++i) {
        const double q = TStatDistribution(p, GammaParam(i * 1e-3)).quantile(Probability(0.05), hint);
        hint = q;
        scan = std::max(scan, q);
      }
      const double excess = sup.c_sup - z;
      const double gap = std::abs(sup.c_sup - scan);
      ok = ok && excess > 1e-4 && gap <= 1e-4;
      detail += "rho=" + num(rho) + ": c_sup=" + num(sup.c_sup) + " excess=" + num(excess) +
                " |scan diff|=" + num(gap) + "  ";
    }
    return Outcome{ok, detail};
  });

  criterion(6, "fixed-sup-level", 120, [&] {
    const auto rule = prepare_rule(CriticalValueRule::fixed_sup(kDelta), main_model, store());
    const auto rep = max_size(rule, default_size_gammas());
    const double at = rejection_prob_semianalytic(rule, GammaParam(rule.sup().gamma_max));
    const bool ok = rep.max_size <= kDelta + kBudget && std::abs(at - kDelta) <= kBudget;
    return Outcome{ok, "max size " + num(rep.max_size) + ", size at gamma_max " + num(at)};
  });

  criterion(7, "loh-level-and-floor", 180, [&] {
    const auto rule = prepare_rule(CriticalValueRule::loh(kDelta, kEta), main_model, store());
    const auto rep = max_size(rule, default_size_gammas());
    const bool ok = rep.max_size >= kDelta - kEta - kBudget && rep.max_size <= kDelta + kBudget;
    return Outcome{ok, "max size " + num(rep.max_size) + " in [" + num(kDelta - kEta - kBudget) + ", " +
                           num(kDelta + kBudget) + "]"};
  });

  criterion(8, "bootstrap-overshoot", 600, [&] {
    const auto rule = prepare_rule(CriticalValueRule::bootstrap(kDelta), main_model, store());
    const auto rep = max_size(rule, default_size_gammas());
    const auto mc = rejection_prob_mc(rule, GammaParam(rep.argmax_gamma), 10'000'000, 8);
    const double gap = std::abs(mc.rejection - rep.max_size);
    const bool ok = rep.max_size - kDelta > kBudget && gap <= 3.0 * mc.std_error;
    return Outcome{ok, "max size " + num(rep.max_size) + " at gamma " + num(rep.argmax_gamma) + "; MC " +
                           num(mc.rejection) + " +- " + num(mc.std_error) + " (|diff|/se = " +
                           num(gap / mc.std_error) + ")"};
  });

  criterion(9, "min-rule-overshoot", 600, [&] {
    const auto sup = prepare_rule(CriticalValueRule::fixed_sup(kDelta), main_model, store());
    const double reduced = -std_normal_quantile(kDelta - kEta);
    if (!(reduced < sup.sup().c_sup - 1e-6)) return Outcome{false, "eta condition not met"};
    const auto gammas = default_size_gammas();
    const auto mr = prepare_rule(CriticalValueRule::min_rule(kDelta, kEta), main_model, store());
    const auto rep = max_size(mr, gammas);
    const auto mcc =
        prepare_rule(CriticalValueRule::mccloskey(kDelta, {kEta, 2 * kEta}), main_model, store());
    const auto a = size_curve(mr, gammas);
    const auto b = size_curve(mcc, gammas);
    double worst = -INFINITY;
    for (std::size_t i = 0; i < gammas.size(); ++i) worst = std::max(worst, a.rejection[i] - b.rejection[i]);
    const bool ok = rep.max_size - kDelta > rep.error_budget && worst <= 1e-9;
    return Outcome{ok, "eta=" + num(kEta) + " max size " + num(rep.max_size) + " (excess " +
                           num(rep.max_size - kDelta) + " vs budget " + num(rep.error_budget) +
                           "); max(min - mccloskey) = " + num(worst)};
  });

  criterion(10, "bootstrap-decomposition", 60, [&] {
    const auto rule = prepare_rule(CriticalValueRule::bootstrap(kDelta), main_model, store());
    const auto d = overshoot_decomposition(rule);
    const double gap = std::abs(d.total - d.direct);
    return Outcome{gap <= kBudget && d.overshoot_term > 0.0,
                   "size " + num(d.direct) + " = delta + " + num(d.overshoot_term) + " (|diff| " + num(gap) +
                       ")"};
  });

  criterion(11, "n-invariance", 120, [] {
    constexpr std::size_t kReps = 100'000;
    double worst_ratio = 0.0;
    std::string detail;
    for (double gamma : {-2.0, 1.0}) {
      const auto small = regression_draws(50, 0.7, 1.96, gamma, kReps, 1100);
      const auto large = regression_draws(500, 0.7, 1.96, gamma, kReps, 1101);
      const double d = ks_two_sample(small, large);
      worst_ratio = std::max(worst_ratio, d / ks_two_sample_critical_001(kReps, kReps));
      detail += "D(gamma=" + num(gamma) + ") = " + num(d) + "  ";
    }
    return Outcome{worst_ratio <= 1.0, detail + "(crit " + num(ks_two_sample_critical_001(kReps, kReps)) + ")"};
  });

  criterion(12, "rho-zero-degeneracy", 10, [] {
    const ModelParams flat(0.0, 1.96);
    double worst = 0.0;
    // Loh targets delta - eta by construction; every other rule targets delta.
    const std::pair<CriticalValueRule, double> rules[] = {
        {CriticalValueRule::fixed_sup(kDelta), kDelta},
        {CriticalValueRule::bootstrap(kDelta), kDelta},
        {CriticalValueRule::loh(kDelta, kEta), kDelta - kEta},
        {CriticalValueRule::loh_star(kDelta, kEta), kDelta},
        {CriticalValueRule::min_rule(kDelta, kEta), kDelta},
        {CriticalValueRule::mccloskey(kDelta, {kEta, 2 * kEta}), kDelta}};
    for (const auto& [r, level] : rules) {
      const auto p = prepare_rule(r, flat, store());
      for (double g : {-20.0, -1.0, 0.0, 2.5, 20.0}) {
        worst = std::max(worst, std::abs(p(g) + std_normal_quantile(level)));
        worst = std::max(worst, std::abs(rejection_prob_semianalytic(p, GammaParam(g)) - level));
      }
    }
    return Outcome{worst <= 1e-6, "max deviation " + num(worst) + " (tol 1e-6)"};
  });

  criterion(13, "symmetry-identities", 30, [] {
    double worst = 0.0;
    for (double rho : {-0.6, 0.3, 0.8}) {
      for (double g : {-2.0, 0.5, 3.0}) {
        for (double v : {0.05, 0.3}) {
          const double q = quantile(ModelParams(rho, 1.96), GammaParam(g), Probability(v));
          worst = std::max(worst, std::abs(q - quantile(ModelParams(-rho, 1.96), GammaParam(-g), Probability(v))));
          const double upper = quantile(ModelParams(rho, 1.96), GammaParam(g), Probability(1.0 - v));
          worst = std::max(worst, std::abs(upper + quantile(ModelParams(-rho, 1.96), GammaParam(g), Probability(v))));
        }
      }
    }
    return Outcome{worst <= 1e-7, "max deviation " + num(worst) + " (tol 1e-7)"};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
