#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "postsel/distribution.hpp"
#include "postsel/grid_store.hpp"
#include "postsel/quantile_grid.hpp"

namespace postsel {

// Bound of the sup search over gamma.
inline constexpr double kSupSearchBound = 40.0;

struct SupResult {
  Probability level{0.5};
  double c_sup = 0.0;
  double gamma_max = 0.0;
  // False when the best point sits on the search boundary, i.e. the sup may
  // only be approached as |gamma| grows.
  bool achieved = true;
};

// Worst-case critical value sup_gamma cbar_gamma(v): scan the grid nodes in
// [-bound, bound], then golden-section refine with exact quantiles around the
// best node. Ties go to the smallest |gamma|, negative before positive.
SupResult compute_sup(const QuantileGrid& grid, double bound = kSupSearchBound,
                      double refine_tol = 1e-7);
// Convenience overload building its own grid over [-bound, bound].
SupResult compute_sup(const ModelParams& params, Probability v, double bound = kSupSearchBound,
                      double step = 0.01, DistributionTolerances tol = {});

namespace rules {
struct FixedSup {};
struct Bootstrap {};
struct Loh {
  Probability eta;
};
struct LohStar {
  Probability eta;
};
struct MinRule {
  Probability eta;
};
struct McCloskey {
  std::vector<Probability> etas;
};
}  // namespace rules

// A critical-value rule at nominal level delta.
class CriticalValueRule {
 public:
  using Variant = std::variant<rules::FixedSup, rules::Bootstrap, rules::Loh, rules::LohStar,
                               rules::MinRule, rules::McCloskey>;

  CriticalValueRule(Variant variant, Probability delta);

  static CriticalValueRule fixed_sup(double delta);
  static CriticalValueRule bootstrap(double delta);
  static CriticalValueRule loh(double delta, double eta);
  static CriticalValueRule loh_star(double delta, double eta);
  static CriticalValueRule min_rule(double delta, double eta);
  static CriticalValueRule mccloskey(double delta, std::vector<double> etas);

  const Variant& variant() const noexcept { return variant_; }
  Probability delta() const noexcept { return delta_; }
  // Short machine name: sup, bootstrap, loh, lohstar, min, mccloskey.
  std::string kind() const;
  // Kind plus parameters, e.g. "loh(eta=0.01)".
  std::string describe() const;
  // Every eta the rule uses (empty for sup and bootstrap).
  std::vector<Probability> etas() const;
  // Quantile levels whose grids the rule reads.
  std::vector<Probability> levels() const;

 private:
  Variant variant_;
  Probability delta_;
};

// Grids by quantile level.
using GridSet = std::map<double, std::shared_ptr<const QuantileGrid>>;

// A rule bound to its model, worst-case value and grids; evaluates the
// random critical value as a function of gamma_hat. Immutable and safe to
// share across threads.
class PreparedRule {
 public:
  PreparedRule(CriticalValueRule rule, const ModelParams& params, SupResult sup_delta,
               GridSet grids);

  const CriticalValueRule& rule() const noexcept { return rule_; }
  const ModelParams& params() const noexcept { return params_; }
  const SupResult& sup() const noexcept { return sup_; }
  double delta() const noexcept { return rule_.delta().value(); }
  const QuantileGrid& grid(Probability level) const;

  double operator()(double gamma_hat) const;
  // gamma_hat range on which the rule can be evaluated.
  double gamma_hat_min() const noexcept { return gamma_hat_lo_; }
  double gamma_hat_max() const noexcept { return gamma_hat_hi_; }

 private:
  double loh_value(Probability eta, Probability level, double gamma_hat) const;

  CriticalValueRule rule_;
  ModelParams params_;
  SupResult sup_;
  GridSet grids_;
  double gamma_hat_lo_ = 0.0;
  double gamma_hat_hi_ = 0.0;
};

// Half-width Phi^{-1}(1 - eta/2) of the confidence interval for gamma.
double confidence_half_width(Probability eta);

// Fetches (or builds) the grids a rule needs and its worst-case value.
PreparedRule prepare_rule(const CriticalValueRule& rule, const ModelParams& params,
                          GridStore& store);

double evaluate_rule(const CriticalValueRule& rule, const ModelParams& params, double gamma_hat,
                     const SupResult& sup_delta, const GridSet& grids);

}  // namespace postsel
