#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "oracles.hpp"
#include "postsel/error.hpp"
#include "postsel/normal.hpp"
#include "postsel/size_analysis.hpp"

using namespace postsel;
using testing::shared_store;

namespace {

const ModelParams kModel(0.7, 1.96);

PreparedRule prepared(const CriticalValueRule& r, const ModelParams& m = kModel) {
  return prepare_rule(r, m, shared_store());
}

// Rejection probability written out with Simpson's rule.
double simpson_rejection(const PreparedRule& rule, double gamma) {
  const double rho = rule.params().rho();
  const double c = rule.params().cutoff();
  const double r = std::sqrt(1.0 - rho * rho);
  auto f = [&](double z) {
    const double crit = rule(z + gamma);
    const double w = std::abs(z + gamma) > c ? (crit - rho * z) / r : crit + rho * gamma / r;
    return oracle::normal_pdf(z) * (1.0 - oracle::normal_cdf(w));
  };
  return oracle::simpson_z(f, {-gamma - c, -gamma + c}, 6000);
}

}  // namespace

TEST_CASE("semi-analytic size matches an independent integral") {
  for (const auto& r : {CriticalValueRule::bootstrap(0.05), CriticalValueRule::min_rule(0.05, 0.01)}) {
    const auto p = prepared(r);
    for (double g : {-4.0, -1.9, 0.0, 2.5}) {
      CHECK(std::abs(rejection_prob_semianalytic(p, GammaParam(g)) - simpson_rejection(p, g)) < 1e-7);
    }
  }
}

TEST_CASE("fixed sup rule has size delta at gamma_max") {
  const auto p = prepared(CriticalValueRule::fixed_sup(0.05));
  CHECK(std::abs(rejection_prob_semianalytic(p, GammaParam(p.sup().gamma_max)) - 0.05) < 1e-8);
  CHECK(rejection_prob_semianalytic(p, GammaParam(0.0)) < 0.05);
}

TEST_CASE("Monte Carlo agrees and is thread-count invariant") {
  const auto p = prepared(CriticalValueRule::bootstrap(0.05));
  const GammaParam g(-1.9);
  const auto a = rejection_prob_mc(p, g, 200'000, 99, 1);
  const auto b = rejection_prob_mc(p, g, 200'000, 99, 4);
  CHECK(a.rejection == b.rejection);
  CHECK(a.std_error == doctest::Approx(std::sqrt(a.rejection * (1 - a.rejection) / 200'000)).epsilon(1e-6));
  CHECK(std::abs(a.rejection - rejection_prob_semianalytic(p, g)) < 4.0 * a.std_error);
  CHECK(rejection_prob_mc(p, g, 1000, 100).rejection != rejection_prob_mc(p, g, 1000, 101).rejection);
  CHECK_THROWS_AS(rejection_prob_mc(p, g, 0, 1), DomainError);
}

TEST_CASE("size curves") {
  const auto p = prepared(CriticalValueRule::bootstrap(0.05));
  const std::vector<double> gs{-3.0, -1.0, 1.0};
  const auto sa = size_curve(p, gs);
  CHECK(sa.method == SizeMethod::SemiAnalytic);
  CHECK(sa.rejection.size() == 3);
  CHECK(sa.rejection[1] == rejection_prob_semianalytic(p, GammaParam(-1.0)));
  const auto mc = size_curve_mc(p, gs, 20'000, 5);
  CHECK(mc.method == SizeMethod::MonteCarlo);
  CHECK(mc.rejection[2] == rejection_prob_mc(p, GammaParam(1.0), 20'000, 7).rejection);
  CHECK(to_string(SizeMethod::MonteCarlo) == "monte-carlo");
}

TEST_CASE("max size verdicts") {
  const auto gammas = default_size_gammas(kSupSearchBound, 0.1);
  CHECK(gammas.front() == -40.0);
  CHECK(gammas.back() == doctest::Approx(40.0));

  const auto sup = max_size(prepared(CriticalValueRule::fixed_sup(0.05)), gammas);
  CHECK(sup.verdict == LevelVerdict::Holds);
  CHECK(std::abs(sup.max_size - 0.05) < 1e-5);

  const auto boot = max_size(prepared(CriticalValueRule::bootstrap(0.05)), gammas);
  CHECK(boot.verdict == LevelVerdict::Overshoots);
  CHECK(boot.max_size > 0.12);
  CHECK(boot.margin > 1000.0);

  const auto loh = max_size(prepared(CriticalValueRule::loh(0.05, 0.01)), gammas);
  CHECK(loh.verdict == LevelVerdict::Holds);
  REQUIRE(loh.floor_size.has_value());
  CHECK(*loh.floor_size >= 0.04 - 1e-5);
  CHECK(loh.max_size >= *loh.floor_size - 1e-12);
}

TEST_CASE("coverage is enforced") {
  const auto p = prepared(CriticalValueRule::bootstrap(0.05));
  CHECK_THROWS_AS(rejection_prob_semianalytic(p, GammaParam(50.0)), RangeError);
}

TEST_CASE("bootstrap decomposition at gamma_max") {
  const auto d = overshoot_decomposition(prepared(CriticalValueRule::bootstrap(0.05)));
  CHECK(d.consistent);
  CHECK(d.overshoot_term > 0.0);
  CHECK(std::abs(d.total - d.direct) < 1e-5);
}

TEST_CASE("decomposition needs the rule to stay below c_sup") {
  CHECK_THROWS_AS(overshoot_decomposition(prepared(CriticalValueRule::loh(0.05, 0.01))), PreconditionError);
}

TEST_CASE("rho = 0 sizes equal the nominal level") {
  const ModelParams flat(0.0, 1.96);
  for (const auto& r : {CriticalValueRule::bootstrap(0.05), CriticalValueRule::min_rule(0.05, 0.01)}) {
    const auto p = prepared(r, flat);
    for (double g : {-3.0, 0.0, 1.0}) {
      CHECK(std::abs(rejection_prob_semianalytic(p, GammaParam(g)) - 0.05) < 1e-6);
    }
  }
}

TEST_CASE("n invariance of the size pipeline") {
  CHECK(n_invariance_check(prepared(CriticalValueRule::bootstrap(0.05)), 1.5));
}
