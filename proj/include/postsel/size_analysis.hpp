#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "postsel/critical_values.hpp"

namespace postsel {

// Error budget behind the size verdicts.
inline constexpr double kSemiAnalyticTol = 1e-6;
inline constexpr double kRefineTol = 1e-5;

struct SizeOptions {
  // Absolute tolerance of the z-integral; tighter than kSemiAnalyticTol so
  // the stated accuracy holds with room to spare.
  QuadratureSpec quad{1e-9, std::size_t{1} << 16};
  // Z is integrated over [-z_truncation, z_truncation].
  double z_truncation = 12.0;
  unsigned threads = 0;
};

// P(T' > c_hat(Z + gamma)) by integrating W out analytically: for fixed Z = z
// the statistic is increasing in W, so the conditional rejection probability
// is 1 - Phi(w*(z)).
double rejection_prob_semianalytic(const PreparedRule& rule, GammaParam gamma,
                                   const SizeOptions& opts = {});

struct McEstimate {
  double rejection;
  double std_error;
  std::uint64_t reps;
  std::uint64_t seed;
};

// Replications are drawn in fixed-size blocks, block b from RngStream(seed, b),
// so the estimate is identical for any thread count.
McEstimate rejection_prob_mc(const PreparedRule& rule, GammaParam gamma, std::uint64_t reps,
                             std::uint64_t seed, unsigned threads = 0);

enum class SizeMethod { SemiAnalytic, MonteCarlo };
std::string to_string(SizeMethod method);

struct SizeCurve {
  std::string rule;
  SizeMethod method = SizeMethod::SemiAnalytic;
  std::vector<double> gammas;
  std::vector<double> rejection;
  std::vector<double> std_error;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
};

SizeCurve size_curve(const PreparedRule& rule, std::span<const double> gammas,
                     const SizeOptions& opts = {});
// Point i uses seed + i so curve points are independent.
SizeCurve size_curve_mc(const PreparedRule& rule, std::span<const double> gammas,
                        std::uint64_t reps, std::uint64_t seed, unsigned threads = 0);

enum class LevelVerdict { Holds, Overshoots, Inconclusive };
std::string to_string(LevelVerdict verdict);

struct SizeReport {
  std::string rule;
  double delta;
  double max_size;
  double argmax_gamma;
  LevelVerdict verdict;
  // (max_size - delta) / error_budget
  double margin;
  double error_budget;
  // Loh-type rules: size at the maximiser of cbar_gamma(delta - eta), which
  // is bounded below by delta - eta.
  std::optional<double> floor_size;
  std::optional<double> floor_gamma;
};

// Default gamma grid: [-40, 40] in steps of 0.05.
std::vector<double> default_size_gammas(double bound = kSupSearchBound, double step = 0.05);

// Maximum semi-analytic size over the grid, golden-section refined around
// the best node. Verdicts: overshoots when max_size - delta exceeds three
// error budgets, holds when max_size <= delta + budget.
SizeReport max_size(const PreparedRule& rule, std::span<const double> gammas,
                    const SizeOptions& opts = {});

struct OvershootDecomposition {
  double gamma_max;
  // P(c_hat < T' <= c_sup) at gamma_max
  double overshoot_term;
  // delta + overshoot_term
  double total;
  // rejection_prob_semianalytic at gamma_max
  double direct;
  bool consistent;
};

// Splits the rejection probability at gamma_max(delta) into delta plus the
// mass between the random and the worst-case critical value. Throws
// PreconditionError when the rule exceeds c_sup somewhere on the gamma_hat
// grid.
OvershootDecomposition overshoot_decomposition(const PreparedRule& rule, const SizeOptions& opts = {});

// Confirms the size pipeline only sees (rho, c, delta, eta, gamma): for
// designs of several sample sizes with the same rho, beta values mapped to a
// common gamma yield the same rho_n, gamma and rejection probability.
bool n_invariance_check(const PreparedRule& rule, double gamma = 1.0,
                        std::span<const std::size_t> sample_sizes = {});

}  // namespace postsel
