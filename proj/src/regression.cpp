#include "postsel/regression.hpp"

#include <cmath>
#include <string>

namespace postsel {

RegressionDesign::RegressionDesign(std::size_t n, double m11, double m12, double m22)
    : n_(n), m11_(m11), m12_(m12), m22_(m22) {
  if (n < 2) throw DesignError("design needs n > 1");
  for (double m : {m11, m12, m22}) require_finite(m, "moment matrix entry");
  const double det = m11 * m22 - m12 * m12;
  if (!(m11 > 0.0 && m22 > 0.0) || !(det > 1e-12 * m11 * m22)) {
    throw DesignError("moment matrix X'X/n is not positive definite");
  }
  sigma_alpha_ = std::sqrt(m22 / det);
  sigma_beta_ = std::sqrt(m11 / det);
  sigma_ab_ = -m12 / det;
}

RegressionDesign RegressionDesign::from_regressors(std::vector<double> x1, std::vector<double> x2) {
  if (x1.size() != x2.size()) throw DesignError("regressor columns differ in length");
  const std::size_t n = x1.size();
  if (n < 2) throw DesignError("design needs n > 1");
  double s11 = 0.0;
  double s12 = 0.0;
  double s22 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    s11 += x1[t] * x1[t];
    s12 += x1[t] * x2[t];
    s22 += x2[t] * x2[t];
  }
  const double dn = static_cast<double>(n);
  RegressionDesign design(n, s11 / dn, s12 / dn, s22 / dn);
  design.x1_ = std::move(x1);
  design.x2_ = std::move(x2);
  return design;
}

RegressionDesign RegressionDesign::from_moments(std::size_t n, double m11, double m12, double m22) {
  return RegressionDesign(n, m11, m12, m22);
}

RegressionDesign RegressionDesign::two_level(std::size_t n, double rho) {
  require_finite(rho, "rho");
  if (!(std::abs(rho) < 1.0)) throw DesignError("two_level design needs |rho| < 1");
  if (n < 2) throw DesignError("design needs n > 1");
  // x_t2 = mu + e_t, where e takes value a on k points and b on n - k points
  // with sum(e) = 0 and sum(e^2) = n. Then X'X/n = [[1, mu], [mu, mu^2 + 1]]
  // and rho_n = -mu / sqrt(mu^2 + 1), so mu = -rho / sqrt(1 - rho^2).
  const std::size_t k = n / 2;
  const double dk = static_cast<double>(k);
  const double rest = static_cast<double>(n - k);
  const double a = std::sqrt(rest / dk);
  const double b = -std::sqrt(dk / rest);
  const double mu = -rho / std::sqrt(1.0 - rho * rho);
  std::vector<double> x1(n, 1.0);
  std::vector<double> x2(n);
  for (std::size_t t = 0; t < n; ++t) x2[t] = mu + (t < k ? a : b);
  return from_regressors(std::move(x1), std::move(x2));
}

GammaParam gamma_from_beta(const RegressionDesign& design, double beta) {
  require_finite(beta, "beta");
  return GammaParam(std::sqrt(static_cast<double>(design.n())) * beta / design.sigma_beta());
}

double simulate_regression_tstat(const RegressionDesign& design, double cutoff, double alpha0,
                                 double alpha, double beta, RngStream& rng) {
  if (!design.has_regressors()) {
    throw DesignError("simulation needs an explicit regressor matrix");
  }
  if (!(cutoff > 0.0)) throw DomainError("cutoff must be positive");
  const auto& x1 = design.x1();
  const auto& x2 = design.x2();
  const std::size_t n = design.n();
  double s1y = 0.0;
  double s2y = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double y = alpha * x1[t] + beta * x2[t] + rng.normal();
    s1y += x1[t] * y;
    s2y += x2[t] * y;
  }
  const double dn = static_cast<double>(n);
  const double s11 = design.m11() * dn;
  const double s12 = design.m12() * dn;
  const double s22 = design.m22() * dn;
  const double det = s11 * s22 - s12 * s12;
  const double alpha_u = (s22 * s1y - s12 * s2y) / det;
  const double beta_u = (s11 * s2y - s12 * s1y) / det;
  const double alpha_r = s1y / s11;

  const double root_n = std::sqrt(dn);
  const double rho = design.rho_n();
  const bool unrestricted = std::abs(root_n * beta_u / design.sigma_beta()) > cutoff;
  if (unrestricted) return root_n * (alpha_u - alpha0) / design.sigma_alpha();
  return root_n * (alpha_r - alpha0) / (design.sigma_alpha() * std::sqrt(1.0 - rho * rho));
}

}  // namespace postsel
