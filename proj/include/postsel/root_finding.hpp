#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "postsel/error.hpp"
#include "postsel/types.hpp"

namespace postsel {

// Brent's zeroin: bisection safeguarding secant and inverse quadratic
// interpolation steps. The bracket always contains a sign change and
// shrinks until its width is at most tol. Returns the endpoint with the
// smaller residual.
template <class F>
double find_root(F&& f, RootBracket bracket, double tol = 1e-10, int max_iter = 500) {
  require_finite(bracket.lo, "root bracket");
  require_finite(bracket.hi, "root bracket");
  if (!(bracket.lo < bracket.hi)) throw BracketError("root bracket requires lo < hi");
  if (!(tol > 0.0)) throw DomainError("root tolerance must be positive");

  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw DomainError("root target returned NaN");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw BracketError("root bracket [" + std::to_string(a) + ", " + std::to_string(b) +
                       "] has no sign change");
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    // Half-width threshold; the final bracket [b, c] is at most tol wide.
    const double tol1 = 2.0 * eps * std::abs(b) + 0.25 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      return b;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    if (std::abs(d) > tol1) {
      b += d;
    } else {
      b += (xm > 0.0 ? tol1 : -tol1);
    }
    fb = f(b);
    if (std::isnan(fb)) throw DomainError("root target returned NaN");
  }
  throw ConvergenceError("find_root: iteration budget exhausted", b, std::abs(c - b));
}

struct MaximizeResult {
  double x;
  double value;
};

// Golden-section search for a maximum of f on [lo, hi]; the returned point
// is the best one evaluated, endpoints included.
template <class F>
MaximizeResult golden_section_max(F&& f, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw DomainError("golden_section_max requires lo <= hi");
  constexpr double inv_phi = 0.618033988749894848204586834366;
  MaximizeResult best{lo, f(lo)};
  auto consider = [&best](double x, double fx) {
    if (fx > best.value) best = {x, fx};
  };
  consider(hi, f(hi));
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  consider(x1, f1);
  consider(x2, f2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  return best;
}

}  // namespace postsel
