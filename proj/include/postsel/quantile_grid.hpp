#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "postsel/distribution.hpp"
#include "postsel/sparse_table.hpp"

namespace postsel {

struct MaxOp {
  double operator()(double a, double b) const { return a < b ? b : a; }
};

// Table of critical values cbar_gamma(v) at gamma_i = gamma_lo + i * step.
//
// Between nodes the map gamma -> cbar_gamma(v) is represented by a
// piecewise cubic: the piece on [gamma_i, gamma_{i+1}] interpolates the four
// surrounding nodes. interval_sup() returns the exact maximum of that
// interpolant over an interval in O(1), using a sparse table over the
// per-piece maxima. Nested intervals therefore give nested suprema.
class QuantileGrid {
 public:
  QuantileGrid(const ModelParams& params, Probability level, double gamma_lo, double step,
               std::vector<double> values, DistributionTolerances tol);

  const ModelParams& params() const noexcept { return params_; }
  Probability level() const noexcept { return level_; }
  const DistributionTolerances& tolerances() const noexcept { return tol_; }
  double gamma_lo() const noexcept { return gamma_lo_; }
  double gamma_hi() const noexcept { return gamma_at(values_.size() - 1); }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double gamma_at(std::size_t i) const noexcept { return gamma_lo_ + static_cast<double>(i) * step_; }

  bool covers(double lo, double hi) const noexcept;
  // Max of values[first..last] (inclusive).
  double range_max(std::size_t first, std::size_t last) const;
  // Piecewise-cubic value at gamma; exact at the nodes.
  double interpolate(double gamma) const;
  // Max of the interpolant over [lo, hi]; RangeError outside the grid.
  double interval_sup(double lo, double hi) const;

  void write(std::ostream& out) const;
  static QuantileGrid read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static QuantileGrid load(const std::filesystem::path& path);

 private:
  struct Piece {
    // value(t) = c[0] + c[1] t + c[2] t^2 + c[3] t^3 for t in [0, 1]
    std::array<double, 4> c;
  };

  void build_pieces();
  double piece_value(std::size_t k, double t) const;
  double piece_max(std::size_t k, double t_lo, double t_hi) const;
  // Piece index and local coordinate of gamma; gamma must be covered.
  std::pair<std::size_t, double> locate(double gamma) const;

  ModelParams params_;
  Probability level_;
  DistributionTolerances tol_;
  double gamma_lo_;
  double step_;
  std::vector<double> values_;
  std::vector<Piece> pieces_;
  SparseTable<double, MaxOp> node_max_;
  SparseTable<double, MaxOp> piece_max_;
};

// Tabulates cbar_gamma(v) on [gamma_lo, gamma_hi] with the given step. Nodes
// are solved in fixed blocks (each block seeded from its own first node), so
// the table is bit-identical for any thread count.
QuantileGrid build_quantile_grid(const ModelParams& params, Probability v, double gamma_lo,
                                 double gamma_hi, double step, DistributionTolerances tol = {},
                                 unsigned threads = 0);

}  // namespace postsel
