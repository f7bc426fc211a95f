#include <doctest.h>

#include <cmath>
#include <optional>

#include "common.hpp"
#include "postsel/critical_values.hpp"
#include "postsel/error.hpp"
#include "postsel/normal.hpp"

using namespace postsel;
using testing::shared_store;

namespace {

const ModelParams kModel(0.7, 1.96);

double exact_quantile(double gamma, double v, std::optional<double> hint = std::nullopt) {
  return TStatDistribution(kModel, GammaParam(gamma)).quantile(Probability(v), hint);
}

}  // namespace

TEST_CASE("sup agrees with a dense scan of exact quantiles") {
  const auto rule = prepare_rule(CriticalValueRule::fixed_sup(0.05), kModel, shared_store());
  const auto& sup = rule.sup();
  CHECK(sup.achieved);
  double best = -INFINITY;
  double hint = exact_quantile(-8.0, 0.05);
  for (double g = -8.0; g <= 8.0; g += 0.001) {
    hint = exact_quantile(g, 0.05, hint);
    best = std::max(best, hint);
  }
  CHECK(sup.c_sup >= best - 1e-9);
  CHECK(sup.c_sup - best < 1e-6);
  CHECK(sup.c_sup > -std_normal_quantile(0.05) + 1e-4);
  CHECK(std::abs(exact_quantile(sup.gamma_max, 0.05) - sup.c_sup) < 1e-8);
}

TEST_CASE("a maximum on the search boundary is flagged as not achieved") {
  // Synthetic table increasing in gamma, far above any true quantile.
  std::vector<double> values;
  for (int i = 0; i <= 82; ++i) values.push_back(100.0 + i);
  const QuantileGrid grid(kModel, Probability(0.05), -41.0, 1.0, values, {});
  const auto sup = compute_sup(grid);
  CHECK(sup.c_sup == 181.0);
  CHECK(sup.gamma_max == 40.0);
  CHECK_FALSE(sup.achieved);
  CHECK_THROWS_AS(compute_sup(grid, 50.0), RangeError);
  CHECK_THROWS_AS(compute_sup(grid, 0.0), DomainError);
}

TEST_CASE("rule ordering") {
  auto& store = shared_store();
  const auto sup = prepare_rule(CriticalValueRule::fixed_sup(0.05), kModel, store);
  const auto boot = prepare_rule(CriticalValueRule::bootstrap(0.05), kModel, store);
  const auto loh = prepare_rule(CriticalValueRule::loh(0.05, 0.01), kModel, store);
  const auto star = prepare_rule(CriticalValueRule::loh_star(0.05, 0.01), kModel, store);
  const auto mr = prepare_rule(CriticalValueRule::min_rule(0.05, 0.01), kModel, store);
  const auto mcc = prepare_rule(CriticalValueRule::mccloskey(0.05, {0.01, 0.02}), kModel, store);
  for (double g = -20.0; g <= 20.0; g += 0.37) {
    CHECK(sup(g) == sup.sup().c_sup);
    CHECK(std::abs(boot(g) - exact_quantile(g, 0.05)) < 2e-5);
    CHECK(star(g) >= boot(g) - 1e-12);
    CHECK(loh(g) >= star(g));
    CHECK(mr(g) == std::min(sup(g), loh(g)));
    CHECK(mcc(g) <= mr(g));
    CHECK(boot(g) <= sup(g) + 1e-9);
  }
  CHECK(loh.gamma_hat_max() == doctest::Approx(60.0 - confidence_half_width(Probability(0.01))));
  CHECK_THROWS_AS(loh(59.0), RangeError);
}

TEST_CASE("loh value is the interval sup at the reduced level") {
  const auto loh = prepare_rule(CriticalValueRule::loh(0.05, 0.01), kModel, shared_store());
  const double hw = confidence_half_width(Probability(0.01));
  CHECK(hw == doctest::Approx(2.5758293035489).epsilon(1e-12));
  const double g = 1.0;
  double best = -INFINITY;
  for (double x = g - hw; x <= g + hw; x += 0.01) best = std::max(best, exact_quantile(x, 0.04));
  CHECK(std::abs(loh(g) - best) < 1e-5);
}

TEST_CASE("rho = 0 collapses every rule to the normal quantile") {
  const ModelParams flat(0.0, 1.96);
  const double z = -std_normal_quantile(0.05);
  for (const auto& r : {CriticalValueRule::fixed_sup(0.05), CriticalValueRule::bootstrap(0.05),
                        CriticalValueRule::loh_star(0.05, 0.01), CriticalValueRule::min_rule(0.05, 0.01),
                        CriticalValueRule::mccloskey(0.05, {0.01, 0.02})}) {
    const auto p = prepare_rule(r, flat, shared_store());
    for (double g : {-10.0, 0.0, 3.0}) CHECK(std::abs(p(g) - z) < 1e-9);
  }
  const auto loh = prepare_rule(CriticalValueRule::loh(0.05, 0.01), flat, shared_store());
  CHECK(std::abs(loh(2.0) + std_normal_quantile(0.04)) < 1e-9);
}

TEST_CASE("rule construction and naming") {
  CHECK_THROWS_AS(CriticalValueRule::loh(0.05, 0.05), DomainError);
  CHECK_THROWS_AS(CriticalValueRule::min_rule(0.05, 0.0), DomainError);
  CHECK_THROWS_AS(CriticalValueRule::mccloskey(0.05, {}), DomainError);
  CHECK_THROWS_AS(CriticalValueRule::bootstrap(1.0), DomainError);
  CHECK(CriticalValueRule::fixed_sup(0.05).kind() == "sup");
  CHECK(CriticalValueRule::loh(0.05, 0.01).describe() == "loh(eta=0.01)");
  CHECK(CriticalValueRule::mccloskey(0.05, {0.01, 0.02}).describe() == "mccloskey(eta=0.01;0.02)");
  CHECK(CriticalValueRule::min_rule(0.05, 0.01).levels().size() == 2);
}

TEST_CASE("evaluate_rule matches the prepared rule") {
  const auto rule = CriticalValueRule::min_rule(0.05, 0.01);
  const auto p = prepare_rule(rule, kModel, shared_store());
  GridSet grids;
  for (auto level : rule.levels()) grids.emplace(level.value(), shared_store().get(kModel, level));
  CHECK(evaluate_rule(rule, kModel, 0.5, p.sup(), grids) == p(0.5));
}
