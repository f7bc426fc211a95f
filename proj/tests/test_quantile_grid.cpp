#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "postsel/error.hpp"
#include "postsel/quantile_grid.hpp"

using namespace postsel;

namespace {

QuantileGrid small_grid(unsigned threads = 1) {
  return build_quantile_grid(ModelParams(0.7, 1.96), Probability(0.05), -6.0, 6.0, 0.05, {}, threads);
}

}  // namespace

TEST_CASE("grid nodes are exact quantiles") {
  const auto g = small_grid();
  CHECK(g.size() == 241);
  CHECK(g.gamma_hi() == doctest::Approx(6.0));
  const ModelParams p(0.7, 1.96);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    CHECK(std::abs(g.values()[i] - quantile(p, GammaParam(g.gamma_at(i)), Probability(0.05))) < 1e-9);
    CHECK(g.interpolate(g.gamma_at(i)) == g.values()[i]);
  }
}

TEST_CASE("grid build is independent of the thread count") {
  const auto a = small_grid(1);
  const auto b = small_grid(3);
  CHECK(a.values() == b.values());
}

TEST_CASE("interpolation error between nodes is small at the default step") {
  const auto g = build_quantile_grid(ModelParams(0.7, 1.96), Probability(0.05), -6.0, 6.0, 0.01);
  const ModelParams p(0.7, 1.96);
  double worst = 0.0;
  for (double x = -5.9; x < 5.9; x += 0.0371) {
    worst = std::max(worst, std::abs(g.interpolate(x) - quantile(p, GammaParam(x), Probability(0.05))));
  }
  CHECK(worst < 5e-6);
}

TEST_CASE("interval_sup equals a dense scan of the interpolant") {
  const auto g = small_grid();
  for (auto [lo, hi] : {std::pair{-5.0, -1.0}, std::pair{-2.73, -2.71}, std::pair{0.013, 4.987},
                        std::pair{-6.0, 6.0}, std::pair{1.0, 1.0}}) {
    double scan = g.interpolate(lo);
    for (int i = 0; i <= 400000; ++i) scan = std::max(scan, g.interpolate(lo + (hi - lo) * i / 400000.0));
    const double sup = g.interval_sup(lo, hi);
    CHECK(sup >= scan - 1e-12);
    CHECK(sup - scan < 1e-10);
  }
  CHECK(g.interval_sup(-4.0, 4.0) >= g.interval_sup(-3.0, 3.0));
  CHECK_THROWS_AS(g.interval_sup(-7.0, 0.0), RangeError);
  CHECK_THROWS_AS(g.interpolate(6.5), RangeError);
}

TEST_CASE("serialization round trip") {
  const auto g = small_grid();
  std::stringstream buf;
  g.write(buf);
  const auto back = QuantileGrid::read(buf);
  CHECK(back.values() == g.values());
  CHECK(back.params() == g.params());
  CHECK(back.level() == g.level());
  CHECK(back.step() == g.step());
  CHECK(back.tolerances() == g.tolerances());
  CHECK(back.interval_sup(-3.0, 2.0) == g.interval_sup(-3.0, 2.0));
}

TEST_CASE("corrupted grid files are rejected") {
  const auto g = small_grid();
  std::stringstream buf;
  g.write(buf);
  const std::string bytes = buf.str();

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  std::stringstream a(flipped);
  CHECK_THROWS_AS(QuantileGrid::read(a), CacheFormatError);

  std::stringstream b(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(QuantileGrid::read(b), CacheFormatError);

  std::string magic = bytes;
  magic[0] = 'X';
  std::stringstream c(magic);
  CHECK_THROWS_AS(QuantileGrid::read(c), CacheFormatError);

  CHECK_THROWS(QuantileGrid::load("/nonexistent/dir/grid.bin"));
}

TEST_CASE("grid construction is validated") {
  const ModelParams p(0.3, 1.0);
  CHECK_THROWS_AS(QuantileGrid(p, Probability(0.05), 0.0, 0.1, {1, 2, 3}, {}), DomainError);
  CHECK_THROWS_AS(QuantileGrid(p, Probability(0.05), 0.0, -0.1, {1, 2, 3, 4}, {}), DomainError);
  CHECK_THROWS_AS(build_quantile_grid(p, Probability(0.0), -1, 1, 0.1), DomainError);
}
