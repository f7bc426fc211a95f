#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <mutex>

#include "postsel/critical_values.hpp"
#include "postsel/distribution.hpp"
#include "postsel/error.hpp"
#include "postsel/grid_store.hpp"
#include "postsel/size_analysis.hpp"
#include "postsel/verify.hpp"
#include "postsel/version.hpp"

namespace py = pybind11;
using namespace postsel;

namespace {

std::mutex store_mutex;
std::unique_ptr<GridStore> store_ptr;

GridStore& store() {
  std::lock_guard lock(store_mutex);
  if (!store_ptr) store_ptr = std::make_unique<GridStore>(GridSpec{}, cache_dir_from_env());
  return *store_ptr;
}

// Long computations release the GIL.
template <class F>
auto nogil(F&& f) {
  py::gil_scoped_release release;
  return f();
}

}  // namespace

PYBIND11_MODULE(_postsel, m) {
  m.doc() = "Post-model-selection t-statistic: distribution, critical-value rules, size";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_ArithmeticError);

  m.def("density", [](double rho, double cutoff, double gamma, double u) {
    return density(ModelParams(rho, cutoff), GammaParam(gamma), u);
  }, py::arg("rho"), py::arg("cutoff"), py::arg("gamma"), py::arg("u"));
  m.def("cdf", [](double rho, double cutoff, double gamma, double t) {
    return cdf(ModelParams(rho, cutoff), GammaParam(gamma), t);
  }, py::arg("rho"), py::arg("cutoff"), py::arg("gamma"), py::arg("t"));
  m.def("quantile", [](double rho, double cutoff, double gamma, double v) {
    return quantile(ModelParams(rho, cutoff), GammaParam(gamma), Probability(v));
  }, py::arg("rho"), py::arg("cutoff"), py::arg("gamma"), py::arg("v"),
     "Upper-v critical value: P(T' > q) = v.");
  m.def("sample", [](double rho, double cutoff, double gamma, std::size_t n, std::uint64_t seed) {
    const ModelParams p(rho, cutoff);
    const GammaParam g(gamma);
    return nogil([&] {
      RngStream rng(seed, 0);
      std::vector<double> out(n);
      for (auto& t : out) t = sample_tprime(p, g, rng).t;
      return out;
    });
  }, py::arg("rho"), py::arg("cutoff"), py::arg("gamma"), py::arg("n"), py::arg("seed") = 0);

  py::class_<SupResult>(m, "SupResult")
      .def_property_readonly("level", [](const SupResult& s) { return s.level.value(); })
      .def_readonly("c_sup", &SupResult::c_sup)
      .def_readonly("gamma_max", &SupResult::gamma_max)
      .def_readonly("achieved", &SupResult::achieved)
      .def("__repr__", [](const SupResult& s) {
        return "SupResult(c_sup=" + std::to_string(s.c_sup) + ", gamma_max=" + std::to_string(s.gamma_max) + ")";
      });
  m.def("compute_sup", [](double rho, double cutoff, double v) {
    const ModelParams p(rho, cutoff);
    return nogil([&] { return compute_sup(*store().get(p, Probability(v))); });
  }, py::arg("rho"), py::arg("cutoff"), py::arg("v"));

  py::class_<CriticalValueRule>(m, "Rule")
      .def_static("fixed_sup", &CriticalValueRule::fixed_sup, py::arg("delta"))
      .def_static("bootstrap", &CriticalValueRule::bootstrap, py::arg("delta"))
      .def_static("loh", &CriticalValueRule::loh, py::arg("delta"), py::arg("eta"))
      .def_static("loh_star", &CriticalValueRule::loh_star, py::arg("delta"), py::arg("eta"))
      .def_static("min_rule", &CriticalValueRule::min_rule, py::arg("delta"), py::arg("eta"))
      .def_static("mccloskey", &CriticalValueRule::mccloskey, py::arg("delta"), py::arg("etas"))
      .def_property_readonly("kind", &CriticalValueRule::kind)
      .def_property_readonly("delta", [](const CriticalValueRule& r) { return r.delta().value(); })
      .def("__repr__", &CriticalValueRule::describe);

  py::class_<SizeReport>(m, "SizeReport")
      .def_readonly("rule", &SizeReport::rule)
      .def_readonly("delta", &SizeReport::delta)
      .def_readonly("max_size", &SizeReport::max_size)
      .def_readonly("argmax_gamma", &SizeReport::argmax_gamma)
      .def_property_readonly("verdict", [](const SizeReport& r) { return to_string(r.verdict); })
      .def_readonly("margin", &SizeReport::margin)
      .def_readonly("error_budget", &SizeReport::error_budget)
      .def_readonly("floor_size", &SizeReport::floor_size);

  py::class_<PreparedRule>(m, "PreparedRule")
      .def("__call__", &PreparedRule::operator(), py::arg("gamma_hat"))
      .def_property_readonly("sup", &PreparedRule::sup)
      .def_property_readonly("rule", &PreparedRule::rule)
      .def("rejection_probability", [](const PreparedRule& r, double gamma) {
        return nogil([&] { return rejection_prob_semianalytic(r, GammaParam(gamma)); });
      }, py::arg("gamma"))
      .def("rejection_probability_mc", [](const PreparedRule& r, double gamma, std::uint64_t reps,
                                          std::uint64_t seed) {
        const auto est = nogil([&] { return rejection_prob_mc(r, GammaParam(gamma), reps, seed); });
        return py::make_tuple(est.rejection, est.std_error);
      }, py::arg("gamma"), py::arg("reps"), py::arg("seed") = 0, "Returns (estimate, standard error).")
      .def("max_size", [](const PreparedRule& r, double step) {
        return nogil([&] { return max_size(r, default_size_gammas(kSupSearchBound, step)); });
      }, py::arg("step") = 0.05);

  m.def("prepare", [](const CriticalValueRule& rule, double rho, double cutoff) {
    const ModelParams p(rho, cutoff);
    return nogil([&] { return prepare_rule(rule, p, store()); });
  }, py::arg("rule"), py::arg("rho"), py::arg("cutoff"));

  py::class_<GridStoreStats>(m, "CacheStats")
      .def_readonly("memory_hits", &GridStoreStats::memory_hits)
      .def_readonly("disk_hits", &GridStoreStats::disk_hits)
      .def_readonly("builds", &GridStoreStats::builds)
      .def_readonly("rejected_files", &GridStoreStats::rejected_files);
  m.def("cache_stats", [] { return store().stats(); });
  m.def("set_cache_dir", [](std::optional<std::string> dir) {
    std::lock_guard lock(store_mutex);
    std::optional<std::filesystem::path> path;
    if (dir) path = *dir;
    store_ptr = std::make_unique<GridStore>(GridSpec{}, path);
  }, py::arg("path"), "Replace the grid store; None disables the disk cache.");

  m.def("verify", [](double rho, double cutoff, double delta, double eta, std::uint64_t reps,
                     std::uint64_t seed) {
    VerifyConfig cfg;
    cfg.rho = rho;
    cfg.cutoff = cutoff;
    cfg.delta = delta;
    cfg.eta = eta;
    cfg.reps = reps;
    cfg.seed = seed;
    const auto report = nogil([&] { return run_verification(cfg, store()); });
    py::list checks;
    for (const auto& c : report.checks) {
      checks.append(py::dict(py::arg("name") = c.name, py::arg("status") = to_string(c.status),
                             py::arg("value") = c.value, py::arg("tolerance") = c.tolerance,
                             py::arg("detail") = c.detail));
    }
    return py::make_tuple(report.passed(), checks);
  }, py::arg("rho") = 0.7, py::arg("cutoff") = 1.96, py::arg("delta") = 0.05, py::arg("eta") = 0.01,
     py::arg("reps") = 200000, py::arg("seed") = 20140515);
}
