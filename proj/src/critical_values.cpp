#include "postsel/critical_values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "postsel/normal.hpp"
#include "postsel/root_finding.hpp"

namespace postsel {

namespace {

Probability reduced_level(Probability delta, Probability eta) {
  return Probability(delta.value() - eta.value());
}

void require_eta(Probability eta, Probability delta) {
  if (!(eta.value() > 0.0 && eta.value() < delta.value())) {
    throw DomainError("eta must satisfy 0 < eta < delta");
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_eta(Probability eta) {
  std::ostringstream os;
  os << eta.value();
  return os.str();
}

}  // namespace

SupResult compute_sup(const QuantileGrid& grid, double bound, double refine_tol) {
  if (!(bound > 0.0)) throw DomainError("sup search bound must be positive");
  const auto& params = grid.params();
  const Probability level = grid.level();
  if (params.rho() == 0.0) {
    return {level, -std_normal_quantile(level.value()), 0.0, true};
  }
  if (!grid.covers(-bound, bound)) throw RangeError("grid does not cover the sup search range");

  const double step = grid.step();
  const auto first = static_cast<std::size_t>(std::ceil((-bound - grid.gamma_lo()) / step - 1e-9));
  const auto last = static_cast<std::size_t>(std::floor((bound - grid.gamma_lo()) / step + 1e-9));
  const auto& values = grid.values();
  const double top = grid.range_max(first, last);
  const double tie = 1e-12 * std::max(1.0, std::abs(top));

  std::size_t best = first;
  bool found = false;
  for (std::size_t i = first; i <= last; ++i) {
    if (values[i] < top - tie) continue;
    const double g = grid.gamma_at(i);
    const double b = grid.gamma_at(best);
    if (!found || std::abs(g) < std::abs(b) || (std::abs(g) == std::abs(b) && g < b)) {
      best = i;
      found = true;
    }
  }

  const double node_gamma = grid.gamma_at(best);
  SupResult result{level, values[best], node_gamma, best != first && best != last};
  const double lo = std::max(node_gamma - step, -bound);
  const double hi = std::min(node_gamma + step, bound);
  const double hint = values[best];
  auto exact = [&](double gamma) {
    return TStatDistribution(params, GammaParam(gamma), grid.tolerances()).quantile(level, hint);
  };
  const auto refined = golden_section_max(exact, lo, hi, refine_tol);
  if (refined.value > result.c_sup) {
    result.c_sup = refined.value;
    result.gamma_max = refined.x;
  }
  return result;
}

SupResult compute_sup(const ModelParams& params, Probability v, double bound, double step,
                      DistributionTolerances tol) {
  const auto grid = build_quantile_grid(params, v, -bound, bound, step, tol);
  return compute_sup(grid, bound);
}

CriticalValueRule::CriticalValueRule(Variant variant, Probability delta)
    : variant_(std::move(variant)), delta_(delta) {
  if (!delta_.is_open()) throw DomainError("delta must satisfy 0 < delta < 1");
  std::visit(Overloaded{
                 [](const rules::FixedSup&) {},
                 [](const rules::Bootstrap&) {},
                 [this](const rules::Loh& r) { require_eta(r.eta, delta_); },
                 [this](const rules::LohStar& r) { require_eta(r.eta, delta_); },
                 [this](const rules::MinRule& r) { require_eta(r.eta, delta_); },
                 [this](const rules::McCloskey& r) {
                   if (r.etas.empty()) throw DomainError("McCloskey rule needs at least one eta");
                   for (auto eta : r.etas) require_eta(eta, delta_);
                 },
             },
             variant_);
}

CriticalValueRule CriticalValueRule::fixed_sup(double delta) {
  return {rules::FixedSup{}, Probability(delta)};
}
CriticalValueRule CriticalValueRule::bootstrap(double delta) {
  return {rules::Bootstrap{}, Probability(delta)};
}
CriticalValueRule CriticalValueRule::loh(double delta, double eta) {
  return {rules::Loh{Probability(eta)}, Probability(delta)};
}
CriticalValueRule CriticalValueRule::loh_star(double delta, double eta) {
  return {rules::LohStar{Probability(eta)}, Probability(delta)};
}
CriticalValueRule CriticalValueRule::min_rule(double delta, double eta) {
  return {rules::MinRule{Probability(eta)}, Probability(delta)};
}
CriticalValueRule CriticalValueRule::mccloskey(double delta, std::vector<double> etas) {
  rules::McCloskey r;
  for (double e : etas) r.etas.emplace_back(e);
  return {std::move(r), Probability(delta)};
}

std::string CriticalValueRule::kind() const {
  return std::visit(Overloaded{
                        [](const rules::FixedSup&) { return std::string("sup"); },
                        [](const rules::Bootstrap&) { return std::string("bootstrap"); },
                        [](const rules::Loh&) { return std::string("loh"); },
                        [](const rules::LohStar&) { return std::string("lohstar"); },
                        [](const rules::MinRule&) { return std::string("min"); },
                        [](const rules::McCloskey&) { return std::string("mccloskey"); },
                    },
                    variant_);
}

std::string CriticalValueRule::describe() const {
  const auto list = etas();
  if (list.empty()) return kind();
  std::string out = kind() + "(eta=";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i > 0) out += ";";
    out += format_eta(list[i]);
  }
  return out + ")";
}

std::vector<Probability> CriticalValueRule::etas() const {
  return std::visit(Overloaded{
                        [](const rules::FixedSup&) { return std::vector<Probability>{}; },
                        [](const rules::Bootstrap&) { return std::vector<Probability>{}; },
                        [](const rules::Loh& r) { return std::vector<Probability>{r.eta}; },
                        [](const rules::LohStar& r) { return std::vector<Probability>{r.eta}; },
                        [](const rules::MinRule& r) { return std::vector<Probability>{r.eta}; },
                        [](const rules::McCloskey& r) { return r.etas; },
                    },
                    variant_);
}

std::vector<Probability> CriticalValueRule::levels() const {
  std::vector<Probability> out{delta_};
  const bool reduced = !std::holds_alternative<rules::LohStar>(variant_);
  if (reduced) {
    for (auto eta : etas()) out.push_back(reduced_level(delta_, eta));
  }
  return out;
}

double confidence_half_width(Probability eta) {
  if (!eta.is_open()) throw DomainError("eta must satisfy 0 < eta < 1");
  return -std_normal_quantile(0.5 * eta.value());
}

PreparedRule::PreparedRule(CriticalValueRule rule, const ModelParams& params, SupResult sup_delta,
                           GridSet grids)
    : rule_(std::move(rule)), params_(params), sup_(sup_delta), grids_(std::move(grids)) {
  if (sup_.level != rule_.delta()) throw PreconditionError("sup result is for a different level");
  gamma_hat_lo_ = -std::numeric_limits<double>::infinity();
  gamma_hat_hi_ = std::numeric_limits<double>::infinity();
  auto restrict_to = [this](Probability level, double half_width) {
    const auto& g = grid(level);
    if (!(g.params() == params_)) throw PreconditionError("grid built for different model");
    gamma_hat_lo_ = std::max(gamma_hat_lo_, g.gamma_lo() + half_width);
    gamma_hat_hi_ = std::min(gamma_hat_hi_, g.gamma_hi() - half_width);
  };
  std::visit(Overloaded{
                 [](const rules::FixedSup&) {},
                 [&](const rules::Bootstrap&) { restrict_to(rule_.delta(), 0.0); },
                 [&](const rules::Loh& r) {
                   restrict_to(reduced_level(rule_.delta(), r.eta), confidence_half_width(r.eta));
                 },
                 [&](const rules::LohStar& r) {
                   restrict_to(rule_.delta(), confidence_half_width(r.eta));
                 },
                 [&](const rules::MinRule& r) {
                   restrict_to(reduced_level(rule_.delta(), r.eta), confidence_half_width(r.eta));
                 },
                 [&](const rules::McCloskey& r) {
                   for (auto eta : r.etas) {
                     restrict_to(reduced_level(rule_.delta(), eta), confidence_half_width(eta));
                   }
                 },
             },
             rule_.variant());
}

const QuantileGrid& PreparedRule::grid(Probability level) const {
  const auto it = grids_.find(level.value());
  if (it == grids_.end() || !it->second) {
    throw PreconditionError("no quantile grid for level " + std::to_string(level.value()));
  }
  return *it->second;
}

double PreparedRule::loh_value(Probability eta, Probability level, double gamma_hat) const {
  const double k = confidence_half_width(eta);
  return grid(level).interval_sup(gamma_hat - k, gamma_hat + k);
}

double PreparedRule::operator()(double gamma_hat) const {
  require_finite(gamma_hat, "gamma_hat");
  const Probability delta = rule_.delta();
  return std::visit(
      Overloaded{
          [&](const rules::FixedSup&) { return sup_.c_sup; },
          [&](const rules::Bootstrap&) { return grid(delta).interpolate(gamma_hat); },
          [&](const rules::Loh& r) {
            return loh_value(r.eta, reduced_level(delta, r.eta), gamma_hat);
          },
          [&](const rules::LohStar& r) { return loh_value(r.eta, delta, gamma_hat); },
          [&](const rules::MinRule& r) {
            return std::min(sup_.c_sup, loh_value(r.eta, reduced_level(delta, r.eta), gamma_hat));
          },
          [&](const rules::McCloskey& r) {
            double c = sup_.c_sup;
            for (auto eta : r.etas) {
              c = std::min(c, loh_value(eta, reduced_level(delta, eta), gamma_hat));
            }
            return c;
          },
      },
      rule_.variant());
}

PreparedRule prepare_rule(const CriticalValueRule& rule, const ModelParams& params,
                          GridStore& store) {
  GridSet grids;
  for (auto level : rule.levels()) grids.emplace(level.value(), store.get(params, level));
  const auto sup = compute_sup(*grids.at(rule.delta().value()));
  return PreparedRule(rule, params, sup, std::move(grids));
}

double evaluate_rule(const CriticalValueRule& rule, const ModelParams& params, double gamma_hat,
                     const SupResult& sup_delta, const GridSet& grids) {
  return PreparedRule(rule, params, sup_delta, grids)(gamma_hat);
}

}  // namespace postsel
