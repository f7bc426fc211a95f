#pragma once

#include "postsel/types.hpp"

namespace postsel {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362105;

// Standard normal density.
double std_normal_pdf(double u);

// Standard normal distribution function Phi, computed from erfc so that both
// tails keep full relative precision.
double std_normal_cdf(double u);

// Upper tail 1 - Phi(u) without cancellation.
double std_normal_sf(double u);

// Phi^{-1}(p) for 0 < p < 1. Throws DomainError for p in {0, 1}.
double std_normal_quantile(double p);
inline double std_normal_quantile(Probability p) { return std_normal_quantile(p.value()); }

// Window function Phi(a + b) - Phi(a - b).
double delta_fn(double a, double b);

}  // namespace postsel
