#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "postsel/error.hpp"

namespace postsel {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

// A value in [0, 1]: significance levels, confidence defects, quantile levels.
class Probability {
 public:
  explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw DomainError("probability outside [0,1]: " + std::to_string(value));
    }
  }

  double value() const noexcept { return value_; }
  // True for 0 < p < 1.
  bool is_open() const noexcept { return value_ > 0.0 && value_ < 1.0; }

  friend bool operator==(Probability, Probability) = default;
  friend auto operator<=>(Probability, Probability) = default;

 private:
  double value_;
};

struct QuadratureSpec {
  double abs_tol = 1e-10;
  std::size_t max_subdivisions = std::size_t{1} << 16;

  void validate() const {
    if (!(abs_tol > 0.0)) throw DomainError("quadrature abs_tol must be positive");
    if (max_subdivisions < 1) throw DomainError("quadrature max_subdivisions must be >= 1");
  }
};

struct RootBracket {
  double lo;
  double hi;
};

}  // namespace postsel
