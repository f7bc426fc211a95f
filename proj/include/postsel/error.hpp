#pragma once

#include <stdexcept>
#include <string>

namespace postsel {

// Input outside a function's documented domain (NaN, infinities, p not in (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Adaptive routine ran out of budget. The best estimate so far is kept.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A query asked for a gamma range that a quantile grid does not cover.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DesignError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A persisted grid file failed its magic, version, size or checksum test.
class CacheFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace postsel
