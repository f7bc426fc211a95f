#include <doctest.h>

#include <sstream>

#include "postsel/error.hpp"
#include "postsel/report.hpp"
#include "postsel/size_analysis.hpp"
#include "postsel/verify.hpp"

using namespace postsel;

TEST_CASE("size curve csv round trip") {
  SizeCurve curve;
  curve.rule = "loh(eta=0.01)";
  curve.method = SizeMethod::MonteCarlo;
  curve.gammas = {-1.0, 0.0, 2.5};
  curve.rejection = {0.041, 0.0399, 0.0123456789012};
  curve.std_error = {0.001, 0.002, 0.003};
  curve.reps = 1000;
  curve.seed = 17;
  std::stringstream buf;
  write_size_curve_csv(buf, curve, {{"rho", "0.7"}, {"cutoff", "1.96"}});
  const std::string text = buf.str();
  CHECK(text.find("# rho=0.7") != std::string::npos);
  CHECK(text.find("gamma,rejection,stderr,method,reps,seed") != std::string::npos);

  CsvMetadata meta;
  const auto back = read_size_curve_csv(buf, &meta);
  CHECK(back.rule == curve.rule);
  CHECK(back.method == SizeMethod::MonteCarlo);
  CHECK(back.gammas == curve.gammas);
  CHECK(back.rejection[2] == doctest::Approx(curve.rejection[2]).epsilon(1e-9));
  CHECK(back.reps == 1000);
  CHECK(back.seed == 17);
  bool saw_cutoff = false;
  for (const auto& [k, v] : meta) saw_cutoff |= (k == "cutoff" && v == "1.96");
  CHECK(saw_cutoff);
}

TEST_CASE("malformed csv is rejected") {
  std::stringstream bad("gamma,rejection,stderr,method,reps,seed\n1.0,abc,0,semi-analytic,0,0\n");
  CHECK_THROWS(read_size_curve_csv(bad));
}

TEST_CASE("generic table csv") {
  std::stringstream buf;
  write_table_csv(buf, {"a", "b"}, {{1.0, 2.5}, {3.0, 1e-12}}, {});
  CHECK(buf.str() == "a,b\n1,2.5\n3,1e-12\n");
  CHECK(format_number(3.4264740023456) == "3.426474002");
}

TEST_CASE("svg chart") {
  SvgLineChart chart("Size & power", "gamma", "rejection");
  chart.add_series({"bootstrap", {-1, 0, 1}, {0.05, 0.1, 0.07}});
  chart.add_reference({0.05, "delta"});
  const auto svg = chart.render(640, 400);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("Size &amp; power") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("verification report formatting") {
  VerifyReport r;
  r.checks.push_back({"alpha", CheckStatus::Pass, 1e-9, 1e-8, ""});
  r.checks.push_back({"beta", CheckStatus::Skip, 0.0, 0.0, "not applicable"});
  CHECK(r.passed());
  auto text = format_verify_report(r);
  CHECK(text.find("[PASS] alpha") != std::string::npos);
  CHECK(text.find("[SKIP] beta  (not applicable)") != std::string::npos);
  r.checks.push_back({"gamma", CheckStatus::Fail, 1.0, 0.1, ""});
  CHECK_FALSE(r.passed());
  CHECK(format_verify_report(r).find("FAILED") != std::string::npos);
}
