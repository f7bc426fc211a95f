#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "postsel/grid_store.hpp"

namespace postsel {

struct VerifyConfig {
  double rho = 0.7;
  double cutoff = 1.96;
  double delta = 0.05;
  double eta = 0.01;
  std::uint64_t reps = 1'000'000;
  std::uint64_t seed = 20140515;
  // Strict-overshoot and sup-exceedance checks; only meaningful for
  // rho != 0 and delta <= 1/2, and reported as skipped otherwise.
  bool theorem_checks = true;
};

enum class CheckStatus { Pass, Fail, Skip };
std::string to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status;
  double value;
  double tolerance;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

// Runs the property suite for one (rho, c, delta, eta) configuration.
VerifyReport run_verification(const VerifyConfig& config, GridStore& store);

std::string format_verify_report(const VerifyReport& report);

}  // namespace postsel
