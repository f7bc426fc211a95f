#pragma once

#include <cstddef>
#include <vector>

#include "postsel/distribution.hpp"
#include "postsel/rng.hpp"

namespace postsel {

// Two-regressor design y_t = alpha x_t1 + beta x_t2 + eps_t with known unit
// error variance. Stores X'X/n and the entries of its inverse
//   (X'X/n)^{-1} = [ sigma_alpha^2   sigma_ab       ]
//                  [ sigma_ab        sigma_beta^2   ].
class RegressionDesign {
 public:
  // Explicit n x 2 design; throws DesignError when X is rank deficient.
  static RegressionDesign from_regressors(std::vector<double> x1, std::vector<double> x2);
  // Moment-only design (no regressor columns, so it cannot be simulated).
  static RegressionDesign from_moments(std::size_t n, double m11, double m12, double m22);
  // x_t1 = 1 and a two-level x_t2 whose moments give rho_n == rho exactly.
  static RegressionDesign two_level(std::size_t n, double rho);

  std::size_t n() const noexcept { return n_; }
  double m11() const noexcept { return m11_; }
  double m12() const noexcept { return m12_; }
  double m22() const noexcept { return m22_; }
  double sigma_alpha() const noexcept { return sigma_alpha_; }
  double sigma_beta() const noexcept { return sigma_beta_; }
  double sigma_alphabeta() const noexcept { return sigma_ab_; }
  double rho_n() const noexcept { return sigma_ab_ / (sigma_alpha_ * sigma_beta_); }

  bool has_regressors() const noexcept { return !x1_.empty(); }
  const std::vector<double>& x1() const noexcept { return x1_; }
  const std::vector<double>& x2() const noexcept { return x2_; }

 private:
  RegressionDesign(std::size_t n, double m11, double m12, double m22);

  std::size_t n_;
  double m11_;
  double m12_;
  double m22_;
  double sigma_alpha_;
  double sigma_beta_;
  double sigma_ab_;
  std::vector<double> x1_;
  std::vector<double> x2_;
};

// gamma = sqrt(n) beta / sigma_beta
GammaParam gamma_from_beta(const RegressionDesign& design, double beta);

// Simulates one data set from the design with N(0,1) errors, selects the
// unrestricted model when |sqrt(n) beta_hat(U) / sigma_beta| > cutoff, and
// returns the post-selection statistic T_n(alpha0).
double simulate_regression_tstat(const RegressionDesign& design, double cutoff, double alpha0,
                                 double alpha, double beta, RngStream& rng);

}  // namespace postsel
