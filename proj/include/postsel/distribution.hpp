#pragma once

#include <optional>
#include <span>
#include <vector>

#include "postsel/rng.hpp"
#include "postsel/types.hpp"

namespace postsel {

// Largest |rho| accepted; (1 - rho^2)^{-1/2} grows without bound beyond it.
inline constexpr double kMaxAbsRho = 0.999;

// The testing problem: correlation rho between the least-squares estimators
// of the two coefficients and the model-selection cut-off c > 0.
class ModelParams {
 public:
  ModelParams(double rho, double cutoff);

  double rho() const noexcept { return rho_; }
  double cutoff() const noexcept { return cutoff_; }
  // (1 - rho^2)^{-1/2}
  double inv_root() const noexcept { return inv_root_; }
  // Mean of the statistic on the restricted-model branch is -restricted_shift(gamma).
  double restricted_shift(double gamma) const noexcept { return rho_ * inv_root_ * gamma; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double rho_;
  double cutoff_;
  double inv_root_;
};

// Scaled nuisance parameter gamma = sqrt(n) beta / sigma_beta.
class GammaParam {
 public:
  explicit GammaParam(double gamma) : gamma_(gamma) { require_finite(gamma, "gamma"); }
  double value() const noexcept { return gamma_; }

 private:
  double gamma_;
};

struct DistributionTolerances {
  QuadratureSpec quad{1e-11, std::size_t{1} << 16};
  // Width of the final root bracket when inverting the cdf.
  double quantile = 1e-10;

  friend bool operator==(const DistributionTolerances& a, const DistributionTolerances& b) {
    return a.quad.abs_tol == b.quad.abs_tol && a.quad.max_subdivisions == b.quad.max_subdivisions &&
           a.quantile == b.quantile;
  }
};

// Null distribution of the post-model-selection statistic for fixed
// (rho, c, gamma). Its density is a two-component form centred at 0 and at
// -rho gamma / sqrt(1 - rho^2); the mass left of zero is integrated once at
// construction so every cdf call only integrates from 0 to t.
//
// Immutable after construction and safe to share between threads.
class TStatDistribution {
 public:
  TStatDistribution(const ModelParams& params, GammaParam gamma, DistributionTolerances tol = {});

  const ModelParams& params() const noexcept { return params_; }
  double gamma() const noexcept { return gamma_; }
  // Half-width L of the integration window [-L, L].
  double truncation() const noexcept { return truncation_; }

  double density(double u) const;
  double cdf(double t) const;
  // Integral of the density over [a, b].
  double mass(double a, double b) const;
  // (1 - v)-quantile, i.e. the critical value at level v. A hint close to
  // the answer (a neighbouring grid node, say) shortens the search; the
  // result is the same to within the quantile tolerance either way.
  double quantile(Probability v, std::optional<double> hint = std::nullopt) const;
  // cdf at every point of an ascending sequence, integrating only between
  // consecutive points.
  std::vector<double> cdf_sorted(std::span<const double> ascending) const;

 private:
  std::vector<double> breakpoints_in(double a, double b) const;

  ModelParams params_;
  double gamma_;
  DistributionTolerances tol_;
  double truncation_;
  double left_mass_ = 0.5;
  std::vector<double> features_;
};

double density(const ModelParams& params, GammaParam gamma, double u);
double cdf(const ModelParams& params, GammaParam gamma, double t);
double quantile(const ModelParams& params, GammaParam gamma, Probability v);

// One draw of T' = (sqrt(1-rho^2) W + rho Z) 1{|Z+gamma| > c}
//               + (W - rho gamma / sqrt(1-rho^2)) 1{|Z+gamma| <= c}.
struct TPrimeSample {
  double t;
  double gamma_hat;  // Z + gamma
  bool selected_unrestricted;
};

// Draws W then Z from the stream.
TPrimeSample sample_tprime(const ModelParams& params, GammaParam gamma, RngStream& rng);

}  // namespace postsel
