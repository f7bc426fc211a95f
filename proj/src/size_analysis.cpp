#include "postsel/size_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "postsel/normal.hpp"
#include "postsel/parallel.hpp"
#include "postsel/quadrature.hpp"
#include "postsel/regression.hpp"
#include "postsel/root_finding.hpp"

namespace postsel {

namespace {

constexpr std::uint64_t kMcBlock = 1 << 16;

// Threshold on W above which T' exceeds crit, given Z = z.
struct WThreshold {
  double rho;
  double inv_root;
  double cutoff;
  double gamma;

  double operator()(double z, double crit) const {
    if (std::abs(z + gamma) > cutoff) return (crit - rho * z) * inv_root;
    return crit + rho * inv_root * gamma;
  }
};

WThreshold threshold_for(const PreparedRule& rule, double gamma) {
  const auto& p = rule.params();
  return {p.rho(), p.inv_root(), p.cutoff(), gamma};
}

void require_coverage(const PreparedRule& rule, double gamma, double z_trunc) {
  if (gamma - z_trunc < rule.gamma_hat_min() - 1e-9 ||
      gamma + z_trunc > rule.gamma_hat_max() + 1e-9) {
    throw RangeError("rule grids do not cover gamma_hat = gamma +/- " + std::to_string(z_trunc) +
                     " at gamma = " + std::to_string(gamma));
  }
}

}  // namespace

double rejection_prob_semianalytic(const PreparedRule& rule, GammaParam gamma,
                                   const SizeOptions& opts) {
  const double g = gamma.value();
  const double zt = opts.z_truncation;
  require_coverage(rule, g, zt);
  const WThreshold threshold = threshold_for(rule, g);
  auto integrand = [&](double z) {
    const double crit = rule(z + g);
    return std_normal_pdf(z) * std_normal_sf(threshold(z, crit));
  };
  const double c = rule.params().cutoff();
  const std::array<double, 2> switches{-g - c, -g + c};
  const double p = integrate(integrand, -zt, zt, opts.quad, switches);
  return std::clamp(p, 0.0, 1.0);
}

McEstimate rejection_prob_mc(const PreparedRule& rule, GammaParam gamma, std::uint64_t reps,
                             std::uint64_t seed, unsigned threads) {
  if (reps == 0) throw DomainError("Monte Carlo needs at least one replication");
  const std::uint64_t blocks = (reps + kMcBlock - 1) / kMcBlock;
  std::vector<std::uint64_t> hits(blocks, 0);
  parallel_for(
      blocks,
      [&](std::size_t b) {
        RngStream rng(seed, b);
        const std::uint64_t begin = b * kMcBlock;
        const std::uint64_t end = std::min(reps, begin + kMcBlock);
        std::uint64_t count = 0;
        for (std::uint64_t r = begin; r < end; ++r) {
          const auto s = sample_tprime(rule.params(), gamma, rng);
          if (s.t > rule(s.gamma_hat)) ++count;
        }
        hits[b] = count;
      },
      threads == 0 ? default_thread_count() : threads);
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(reps);
  const double p = static_cast<double>(total) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), reps, seed};
}

std::string to_string(SizeMethod method) {
  return method == SizeMethod::SemiAnalytic ? "semi-analytic" : "monte-carlo";
}

std::string to_string(LevelVerdict verdict) {
  switch (verdict) {
    case LevelVerdict::Holds:
      return "holds";
    case LevelVerdict::Overshoots:
      return "overshoots";
    case LevelVerdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

SizeCurve size_curve(const PreparedRule& rule, std::span<const double> gammas,
                     const SizeOptions& opts) {
  SizeCurve curve;
  curve.rule = rule.rule().describe();
  curve.method = SizeMethod::SemiAnalytic;
  curve.gammas.assign(gammas.begin(), gammas.end());
  curve.rejection.resize(gammas.size());
  curve.std_error.assign(gammas.size(), 0.0);
  parallel_for(
      gammas.size(),
      [&](std::size_t i) {
        curve.rejection[i] = rejection_prob_semianalytic(rule, GammaParam(gammas[i]), opts);
      },
      opts.threads == 0 ? default_thread_count() : opts.threads);
  return curve;
}

SizeCurve size_curve_mc(const PreparedRule& rule, std::span<const double> gammas,
                        std::uint64_t reps, std::uint64_t seed, unsigned threads) {
  SizeCurve curve;
  curve.rule = rule.rule().describe();
  curve.method = SizeMethod::MonteCarlo;
  curve.reps = reps;
  curve.seed = seed;
  curve.gammas.assign(gammas.begin(), gammas.end());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const auto est = rejection_prob_mc(rule, GammaParam(gammas[i]), reps, seed + i, threads);
    curve.rejection.push_back(est.rejection);
    curve.std_error.push_back(est.std_error);
  }
  return curve;
}

std::vector<double> default_size_gammas(double bound, double step) {
  if (!(bound > 0.0 && step > 0.0)) throw DomainError("gamma grid needs positive bound and step");
  const auto half = static_cast<long long>(std::llround(bound / step));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long long i = -half; i <= half; ++i) out.push_back(static_cast<double>(i) * step);
  return out;
}

SizeReport max_size(const PreparedRule& rule, std::span<const double> gammas,
                    const SizeOptions& opts) {
  if (gammas.empty()) throw DomainError("max_size needs a non-empty gamma grid");
  const auto curve = size_curve(rule, gammas, opts);
  const auto best = static_cast<std::size_t>(
      std::max_element(curve.rejection.begin(), curve.rejection.end()) - curve.rejection.begin());

  double best_size = curve.rejection[best];
  double best_gamma = gammas[best];
  if (gammas.size() > 1) {
    const double lo = best > 0 ? gammas[best - 1] : gammas[best];
    const double hi = best + 1 < gammas.size() ? gammas[best + 1] : gammas[best];
    auto size_at = [&](double g) { return rejection_prob_semianalytic(rule, GammaParam(g), opts); };
    const auto refined = golden_section_max(size_at, lo, hi, 1e-4);
    if (refined.value > best_size) {
      best_size = refined.value;
      best_gamma = refined.x;
    }
  }

  const double delta = rule.delta();
  const double budget = kSemiAnalyticTol + kRefineTol;
  const double excess = best_size - delta;
  LevelVerdict verdict = LevelVerdict::Inconclusive;
  if (excess > 3.0 * budget) {
    verdict = LevelVerdict::Overshoots;
  } else if (excess <= budget) {
    verdict = LevelVerdict::Holds;
  }

  SizeReport report{curve.rule, delta, best_size, best_gamma, verdict, excess / budget, budget,
                    std::nullopt, std::nullopt};
  if (const auto* loh = std::get_if<rules::Loh>(&rule.rule().variant())) {
    const Probability reduced(delta - loh->eta.value());
    const auto floor_sup = compute_sup(rule.grid(reduced));
    report.floor_gamma = floor_sup.gamma_max;
    report.floor_size = rejection_prob_semianalytic(rule, GammaParam(floor_sup.gamma_max), opts);
  }
  return report;
}

OvershootDecomposition overshoot_decomposition(const PreparedRule& rule, const SizeOptions& opts) {
  const double g = rule.sup().gamma_max;
  const double c_sup = rule.sup().c_sup;
  const double zt = opts.z_truncation;
  require_coverage(rule, g, zt);

  constexpr double kCheckStep = 0.01;
  constexpr double kSlack = 1e-7;
  const auto checks = static_cast<long long>(std::llround(2.0 * zt / kCheckStep));
  for (long long i = 0; i <= checks; ++i) {
    const double gamma_hat = g - zt + static_cast<double>(i) * kCheckStep;
    if (rule(gamma_hat) > c_sup + kSlack) {
      throw PreconditionError("rule exceeds c_sup at gamma_hat = " + std::to_string(gamma_hat));
    }
  }

  const WThreshold threshold = threshold_for(rule, g);
  auto between = [&](double z) {
    const double crit = std::min(rule(z + g), c_sup);
    const double upper = std_normal_cdf(threshold(z, c_sup));
    const double lower = std_normal_cdf(threshold(z, crit));
    return std_normal_pdf(z) * std::max(0.0, upper - lower);
  };
  const double c = rule.params().cutoff();
  const std::array<double, 2> switches{-g - c, -g + c};
  const double term = integrate(between, -zt, zt, opts.quad, switches);
  const double total = rule.delta() + term;
  const double direct = rejection_prob_semianalytic(rule, GammaParam(g), opts);
  return {g, term, total, direct, std::abs(total - direct) <= kSemiAnalyticTol};
}

bool n_invariance_check(const PreparedRule& rule, double gamma,
                        std::span<const std::size_t> sample_sizes) {
  static constexpr std::array<std::size_t, 3> kDefaultSizes{50, 500, 5000};
  if (sample_sizes.empty()) sample_sizes = kDefaultSizes;
  const double rho = rule.params().rho();
  std::optional<double> reference;
  for (std::size_t n : sample_sizes) {
    const auto design = RegressionDesign::two_level(n, rho);
    if (std::abs(design.rho_n() - rho) > 1e-12) return false;
    const double beta = gamma * design.sigma_beta() / std::sqrt(static_cast<double>(n));
    const double mapped = gamma_from_beta(design, beta).value();
    if (std::abs(mapped - gamma) > 1e-12 * std::max(1.0, std::abs(gamma))) return false;
    const double size = rejection_prob_semianalytic(rule, GammaParam(mapped));
    if (!reference) {
      reference = size;
    } else if (std::abs(size - *reference) > 1e-12) {
      return false;
    }
  }
  return true;
}

}  // namespace postsel
