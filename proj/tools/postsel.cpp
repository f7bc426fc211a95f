// postsel: critical values and size analysis for a test after model selection.
//
//   postsel critval --rho 0.7 --cutoff 1.96 --delta 0.05 --gamma 0 --gamma 2.5
//   postsel size    --rule bootstrap --out boot.csv          (plus boot.svg)
//   postsel maxsize --rule min --eta 0.01
//   postsel grid    --cache-dir ~/.cache/postsel
//   postsel verify
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 numeric convergence failure, 4 I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "postsel/critical_values.hpp"
#include "postsel/error.hpp"
#include "postsel/grid_store.hpp"
#include "postsel/normal.hpp"
#include "postsel/report.hpp"
#include "postsel/size_analysis.hpp"
#include "postsel/verify.hpp"
#include "postsel/version.hpp"

namespace {

using namespace postsel;

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNumeric = 3, kIo = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double rho = 0.7;
  double cutoff = 1.96;
  double delta = 0.05;
  double eta = 0.01;
  std::vector<double> eta_list;
  std::string rule;
  std::vector<double> gamma;
  std::optional<double> gamma_min;
  std::optional<double> gamma_max;
  std::optional<double> gamma_step;
  bool mc = false;
  std::uint64_t reps = 100'000;
  std::uint64_t seed = 20140515;
  std::string out;
  std::string cache_dir;
  double tol_quad = DistributionTolerances{}.quad.abs_tol;
  double tol_quantile = DistributionTolerances{}.quantile;
  bool theorem_checks = true;
};

ModelParams model(const RunConfig& cfg) { return ModelParams(cfg.rho, cfg.cutoff); }

std::vector<double> eta_set(const RunConfig& cfg) {
  if (!cfg.eta_list.empty()) return cfg.eta_list;
  const double second = 2.0 * cfg.eta < cfg.delta ? 2.0 * cfg.eta : 0.5 * cfg.eta;
  return {cfg.eta, second};
}

CriticalValueRule make_rule(const std::string& name, const RunConfig& cfg) {
  if (name == "sup") return CriticalValueRule::fixed_sup(cfg.delta);
  if (name == "bootstrap") return CriticalValueRule::bootstrap(cfg.delta);
  if (name == "loh") return CriticalValueRule::loh(cfg.delta, cfg.eta);
  if (name == "lohstar") return CriticalValueRule::loh_star(cfg.delta, cfg.eta);
  if (name == "min") return CriticalValueRule::min_rule(cfg.delta, cfg.eta);
  if (name == "mccloskey") return CriticalValueRule::mccloskey(cfg.delta, eta_set(cfg));
  throw UsageError("unknown rule: " + name);
}

std::vector<CriticalValueRule> selected_rules(const RunConfig& cfg) {
  if (!cfg.rule.empty()) return {make_rule(cfg.rule, cfg)};
  std::vector<CriticalValueRule> out;
  for (const char* name : {"sup", "bootstrap", "loh", "lohstar", "min", "mccloskey"}) {
    out.push_back(make_rule(name, cfg));
  }
  return out;
}

std::vector<double> gamma_values(const RunConfig& cfg, double lo, double hi, double step) {
  if (!cfg.gamma.empty()) return cfg.gamma;
  lo = cfg.gamma_min.value_or(lo);
  hi = cfg.gamma_max.value_or(hi);
  step = cfg.gamma_step.value_or(step);
  if (!(step > 0.0) || !(lo <= hi)) throw UsageError("gamma range needs min <= max and step > 0");
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

GridStore make_store(const RunConfig& cfg) {
  GridSpec spec;
  spec.tol.quad.abs_tol = cfg.tol_quad;
  spec.tol.quantile = cfg.tol_quantile;
  std::optional<std::filesystem::path> dir;
  if (!cfg.cache_dir.empty()) dir = cfg.cache_dir;
  try {
    return GridStore(spec, dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(e.what());
  }
}

CsvMetadata metadata(const RunConfig& cfg) {
  return {{"rho", format_number(cfg.rho)},
          {"cutoff", format_number(cfg.cutoff)},
          {"delta", format_number(cfg.delta)},
          {"eta", format_number(cfg.eta)},
          {"tol_quad", format_number(cfg.tol_quad)},
          {"tol_quantile", format_number(cfg.tol_quantile)},
          {"semi_analytic_tol", format_number(kSemiAnalyticTol)},
          {"version", kVersion}};
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

int cmd_critval(const RunConfig& cfg) {
  const auto params = model(cfg);
  auto store = make_store(cfg);
  const auto rules = selected_rules(cfg);
  std::vector<PreparedRule> prepared;
  for (const auto& r : rules) prepared.push_back(prepare_rule(r, params, store));
  const auto gammas = gamma_values(cfg, -5.0, 5.0, 0.5);

  std::vector<std::string> columns{"gamma_hat", "cbar"};
  for (const auto& r : rules) columns.push_back(r.kind());
  std::vector<std::vector<double>> rows;
  const DistributionTolerances tol{{cfg.tol_quad, DistributionTolerances{}.quad.max_subdivisions},
                                   cfg.tol_quantile};
  for (double g : gammas) {
    std::vector<double> row{g, TStatDistribution(params, GammaParam(g), tol).quantile(Probability(cfg.delta))};
    for (const auto& p : prepared) row.push_back(p(g));
    rows.push_back(std::move(row));
  }

  std::cout << "c_sup(" << format_number(cfg.delta) << ") = " << format_number(prepared.front().sup().c_sup)
            << " at gamma_max = " << format_number(prepared.front().sup().gamma_max) << '\n';
  for (const auto& c : columns) std::cout << ' ' << std::setw(16) << c;
  std::cout << '\n';
  for (const auto& row : rows) {
    for (double v : row) std::cout << ' ' << std::setw(16) << format_number(v);
    std::cout << '\n';
  }
  if (!cfg.out.empty()) {
    auto out = open_output(cfg.out);
    write_table_csv(out, columns, rows, metadata(cfg));
  }
  return kOk;
}

int cmd_size(const RunConfig& cfg) {
  const auto params = model(cfg);
  auto store = make_store(cfg);
  const auto rule = prepare_rule(make_rule(cfg.rule.empty() ? "bootstrap" : cfg.rule, cfg), params, store);
  const auto gammas = gamma_values(cfg, -10.0, 10.0, 0.1);
  const auto curve = cfg.mc ? size_curve_mc(rule, gammas, cfg.reps, cfg.seed) : size_curve(rule, gammas);

  const std::filesystem::path csv_path = cfg.out.empty() ? "size.csv" : cfg.out;
  auto svg_path = csv_path;
  svg_path.replace_extension(".svg");
  {
    auto out = open_output(csv_path);
    write_size_curve_csv(out, curve, metadata(cfg));
  }
  SvgLineChart chart("Rejection probability of " + curve.rule + " (rho=" + format_number(cfg.rho) +
                         ", c=" + format_number(cfg.cutoff) + ")",
                     "gamma", "rejection probability");
  chart.add_series({curve.rule + " (" + to_string(curve.method) + ")", curve.gammas, curve.rejection});
  chart.add_reference({cfg.delta, "delta = " + format_number(cfg.delta)});
  {
    auto out = open_output(svg_path);
    out << chart.render();
  }

  const auto peak = std::max_element(curve.rejection.begin(), curve.rejection.end());
  const auto at = static_cast<std::size_t>(peak - curve.rejection.begin());
  std::cout << curve.rule << ": max rejection " << format_number(*peak) << " at gamma "
            << format_number(curve.gammas[at]) << " (delta " << format_number(cfg.delta) << ")\n"
            << "wrote " << csv_path.string() << " and " << svg_path.string() << '\n';
  return kOk;
}

int cmd_maxsize(const RunConfig& cfg) {
  const auto params = model(cfg);
  auto store = make_store(cfg);
  const auto gammas = gamma_values(cfg, -kSupSearchBound, kSupSearchBound, 0.05);
  std::vector<SizeReport> reports;
  for (const auto& r : selected_rules(cfg)) {
    const auto prepared = prepare_rule(r, params, store);
    reports.push_back(max_size(prepared, gammas));
    const auto& rep = reports.back();
    std::cout << std::left << std::setw(28) << rep.rule << std::right << " max size "
              << format_number(rep.max_size) << " at gamma " << format_number(rep.argmax_gamma)
              << "  verdict " << to_string(rep.verdict) << "  margin " << format_number(rep.margin);
    if (rep.floor_size) std::cout << "  floor " << format_number(*rep.floor_size);
    std::cout << '\n';
  }
  if (!cfg.out.empty()) {
    auto out = open_output(cfg.out);
    write_size_reports_csv(out, reports, metadata(cfg));
  }
  return kOk;
}

int cmd_grid(const RunConfig& cfg) {
  if (cfg.cache_dir.empty()) throw UsageError("grid needs --cache-dir or POSTSEL_CACHE_DIR");
  const auto params = model(cfg);
  auto store = make_store(cfg);
  std::vector<double> levels{cfg.delta};
  for (double eta : eta_set(cfg)) levels.push_back(cfg.delta - eta);
  for (double level : levels) {
    const auto before = store.stats();
    try {
      store.get(params, Probability(level));
    } catch (const std::filesystem::filesystem_error& e) {
      throw IoError(e.what());
    } catch (const std::ios_base::failure& e) {
      throw IoError(e.what());
    }
    const auto after = store.stats();
    const char* what = after.disk_hits > before.disk_hits ? "cache hit" : "built";
    std::cout << "level " << format_number(level) << ": " << what;
    if (after.rejected_files > before.rejected_files) std::cout << " (invalid cache file replaced)";
    std::cout << "  " << store.cache_file(params, Probability(level)).string() << '\n';
  }
  return kOk;
}

int cmd_verify(const RunConfig& cfg) {
  auto store = make_store(cfg);
  VerifyConfig vc;
  vc.rho = cfg.rho;
  vc.cutoff = cfg.cutoff;
  vc.delta = cfg.delta;
  vc.eta = cfg.eta;
  vc.reps = cfg.reps;
  vc.seed = cfg.seed;
  vc.theorem_checks = cfg.theorem_checks;
  const auto report = run_verification(vc, store);
  const auto text = format_verify_report(report);
  std::cout << text;
  if (!cfg.out.empty()) {
    auto out = open_output(cfg.out);
    out << text;
  }
  return report.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical values and size analysis for tests after model selection"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig cfg;
  app.add_option("--rho", cfg.rho, "Correlation of the two least-squares estimators")->capture_default_str();
  app.add_option("--cutoff", cfg.cutoff, "Model-selection cut-off c > 0")->capture_default_str();
  app.add_option("--delta", cfg.delta, "Nominal significance level")->capture_default_str();
  app.add_option("--eta", cfg.eta, "Confidence-set defect for loh/lohstar/min")->capture_default_str();
  app.add_option("--eta-list", cfg.eta_list, "Eta values for the mccloskey rule (default: eta, 2*eta)")
      ->delimiter(',');
  app.add_option("--rule", cfg.rule, "Rule (default: all rules, or bootstrap for size)")
      ->check(CLI::IsMember({"sup", "bootstrap", "loh", "lohstar", "min", "mccloskey"}));
  app.add_option("--gamma", cfg.gamma, "Explicit gamma values (repeatable or comma separated)")
      ->delimiter(',');
  app.add_option("--gamma-min", cfg.gamma_min, "Lower end of the gamma range");
  app.add_option("--gamma-max", cfg.gamma_max, "Upper end of the gamma range");
  app.add_option("--gamma-step", cfg.gamma_step, "Spacing of the gamma range");
  app.add_flag("--mc", cfg.mc, "Monte Carlo instead of the semi-analytic integral");
  app.add_option("--reps", cfg.reps, "Monte Carlo replications")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--out", cfg.out, "Output file (CSV or report)");
  app.add_option("--cache-dir", cfg.cache_dir, "Quantile grid cache directory")->envname("POSTSEL_CACHE_DIR");
  app.add_option("--tol-quad", cfg.tol_quad, "Absolute quadrature tolerance for the cdf")->capture_default_str();
  app.add_option("--tol-quantile", cfg.tol_quantile, "Root bracket width for quantiles")->capture_default_str();
  app.add_flag("--theorem-checks,!--no-theorem-checks", cfg.theorem_checks,
               "Include strict-overshoot checks in verify");

  auto* critval = app.add_subcommand("critval", "Tabulate critical values of each rule over gamma_hat");
  auto* size = app.add_subcommand("size", "Rejection-probability curve (CSV + SVG)");
  auto* maxsize = app.add_subcommand("maxsize", "Maximal size over gamma and level verdicts");
  auto* grid = app.add_subcommand("grid", "Build and persist quantile grids");
  auto* verify = app.add_subcommand("verify", "Run the verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*critval) return cmd_critval(cfg);
    if (*size) return cmd_size(cfg);
    if (*maxsize) return cmd_maxsize(cfg);
    if (*grid) return cmd_grid(cfg);
    if (*verify) return cmd_verify(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "numeric failure: " << e.what() << " (best estimate " << e.best_estimate() << ")\n";
    return kNumeric;
  } catch (const BracketError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}
