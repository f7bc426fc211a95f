#include "postsel/distribution.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <string>

#include "postsel/normal.hpp"
#include "postsel/quadrature.hpp"
#include "postsel/root_finding.hpp"

namespace postsel {

namespace {

constexpr double kBaseTruncation = 12.0;
constexpr double kFeatureSpread = 4.0;

}  // namespace

ModelParams::ModelParams(double rho, double cutoff) : rho_(rho), cutoff_(cutoff) {
  require_finite(rho, "rho");
  require_finite(cutoff, "cutoff");
  if (std::abs(rho) > kMaxAbsRho) {
    throw DomainError("|rho| must not exceed " + std::to_string(kMaxAbsRho));
  }
  if (!(cutoff > 0.0)) throw DomainError("cutoff must be positive");
  inv_root_ = 1.0 / std::sqrt(1.0 - rho * rho);
}

TStatDistribution::TStatDistribution(const ModelParams& params, GammaParam gamma,
                                     DistributionTolerances tol)
    : params_(params), gamma_(gamma.value()), tol_(tol) {
  tol_.quad.validate();
  if (!(tol_.quantile > 0.0)) throw DomainError("quantile tolerance must be positive");
  const double offset = std::abs(params_.restricted_shift(gamma_));
  truncation_ = kBaseTruncation + offset;
  if (params_.rho() == 0.0) return;

  // Locations where the integrand changes shape: both component centres and
  // the edges of the dip where the restricted model is selected.
  const double center = -params_.restricted_shift(gamma_);
  for (double c : {0.0, center}) {
    features_.push_back(c - kFeatureSpread);
    features_.push_back(c);
    features_.push_back(c + kFeatureSpread);
  }
  const double rho = params_.rho();
  features_.push_back((-gamma_ - params_.cutoff()) / rho);
  features_.push_back((-gamma_ + params_.cutoff()) / rho);
  std::sort(features_.begin(), features_.end());

  left_mass_ = mass(-truncation_, 0.0);
}

double TStatDistribution::density(double u) const {
  require_finite(u, "density argument");
  if (params_.rho() == 0.0) return std_normal_pdf(u);
  const double s = params_.inv_root();
  const double rho = params_.rho();
  const double c = params_.cutoff();
  const double restricted = delta_fn(gamma_, c) * std_normal_pdf(u + rho * s * gamma_);
  const double unrestricted =
      (1.0 - delta_fn(s * (gamma_ + rho * u), s * c)) * std_normal_pdf(u);
  return restricted + unrestricted;
}

std::vector<double> TStatDistribution::breakpoints_in(double a, double b) const {
  std::vector<double> out;
  for (double f : features_) {
    if (f > a && f < b) out.push_back(f);
  }
  return out;
}

double TStatDistribution::mass(double a, double b) const {
  require_finite(a, "mass bound");
  require_finite(b, "mass bound");
  if (params_.rho() == 0.0) return std_normal_cdf(b) - std_normal_cdf(a);
  if (a == b) return 0.0;
  if (a > b) return -mass(b, a);
  const double lo = std::clamp(a, -truncation_, truncation_);
  const double hi = std::clamp(b, -truncation_, truncation_);
  if (lo == hi) return 0.0;
  const auto cuts = breakpoints_in(lo, hi);
  return integrate([this](double u) { return density(u); }, lo, hi, tol_.quad, cuts);
}

double TStatDistribution::cdf(double t) const {
  require_finite(t, "cdf argument");
  if (params_.rho() == 0.0) return std_normal_cdf(t);
  return std::clamp(left_mass_ + mass(0.0, t), 0.0, 1.0);
}

std::vector<double> TStatDistribution::cdf_sorted(std::span<const double> ascending) const {
  std::vector<double> out;
  out.reserve(ascending.size());
  if (params_.rho() == 0.0) {
    for (double t : ascending) out.push_back(std_normal_cdf(t));
    return out;
  }
  if (ascending.empty()) return out;
  double prev = ascending.front();
  double acc = left_mass_ + mass(0.0, prev);
  for (double t : ascending) {
    if (t < prev) throw DomainError("cdf_sorted requires ascending input");
    acc += mass(prev, t);
    prev = t;
    out.push_back(std::clamp(acc, 0.0, 1.0));
  }
  return out;
}

double TStatDistribution::quantile(Probability v, std::optional<double> hint) const {
  if (!v.is_open()) throw DomainError("quantile level must satisfy 0 < v < 1");
  const double normal_q = -std_normal_quantile(v.value());
  if (params_.rho() == 0.0) return normal_q;

  const double target = 1.0 - v.value();
  if (hint && std::isfinite(*hint)) {
    // Near a good starting point only short integrals from the hint are needed.
    const double anchor = *hint;
    const double base = cdf(anchor) - target;
    auto excess = [this, anchor, base](double x) { return base + mass(anchor, x); };
    double step = 0.05;
    for (int attempt = 0; attempt < 6; ++attempt) {
      const RootBracket bracket{anchor - step, anchor + step};
      if (excess(bracket.lo) < 0.0 && excess(bracket.hi) > 0.0) {
        return find_root(excess, bracket, tol_.quantile);
      }
      step *= 4.0;
    }
  }

  auto excess = [this, target](double x) { return cdf(x) - target; };
  double half_width = 10.0 + std::abs(params_.restricted_shift(gamma_));
  for (int attempt = 0; attempt < 8; ++attempt) {
    const RootBracket bracket{normal_q - half_width, normal_q + half_width};
    if (excess(bracket.lo) < 0.0 && excess(bracket.hi) > 0.0) {
      return find_root(excess, bracket, tol_.quantile);
    }
    half_width *= 2.0;
  }
  throw BracketError("quantile: could not bracket the (1 - v)-quantile");
}

double density(const ModelParams& params, GammaParam gamma, double u) {
  return TStatDistribution(params, gamma).density(u);
}

double cdf(const ModelParams& params, GammaParam gamma, double t) {
  return TStatDistribution(params, gamma).cdf(t);
}

double quantile(const ModelParams& params, GammaParam gamma, Probability v) {
  return TStatDistribution(params, gamma).quantile(v);
}

TPrimeSample sample_tprime(const ModelParams& params, GammaParam gamma, RngStream& rng) {
  const double w = rng.normal();
  const double z = rng.normal();
  const double g = gamma.value();
  const double gamma_hat = z + g;
  const bool unrestricted = std::abs(gamma_hat) > params.cutoff();
  const double rho = params.rho();
  const double t = unrestricted ? std::sqrt(1.0 - rho * rho) * w + rho * z
                                : w - params.restricted_shift(g);
  return {t, gamma_hat, unrestricted};
}

}  // namespace postsel
