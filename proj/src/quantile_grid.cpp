#include "postsel/quantile_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "postsel/parallel.hpp"

namespace postsel {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'Q', 'G', 'R', 'I', 'D', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kBuildBlock = 64;
// Snap tolerance, in units of the step, for treating a point as a node.
constexpr double kNodeSnap = 1e-9;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

template <class T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw CacheFormatError("grid file truncated");
  T value;
  std::memcpy(&value, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

QuantileGrid::QuantileGrid(const ModelParams& params, Probability level, double gamma_lo,
                           double step, std::vector<double> values, DistributionTolerances tol)
    : params_(params), level_(level), tol_(tol), gamma_lo_(gamma_lo), step_(step),
      values_(std::move(values)) {
  require_finite(gamma_lo, "grid gamma_lo");
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("grid step must be positive");
  if (values_.size() < 4) throw DomainError("quantile grid needs at least 4 nodes");
  for (double v : values_) require_finite(v, "grid value");
  build_pieces();
}

void QuantileGrid::build_pieces() {
  const std::size_t n = values_.size();
  pieces_.resize(n - 1);
  std::vector<double> maxima(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t j0 = std::min(k > 0 ? k - 1 : 0, n - 4);
    const double y0 = values_[j0];
    const double y1 = values_[j0 + 1];
    const double y2 = values_[j0 + 2];
    const double y3 = values_[j0 + 3];
    // Newton forward differences, expanded to monomials in x = node offset from j0.
    const double d1 = y1 - y0;
    const double d2 = y2 - 2.0 * y1 + y0;
    const double d3 = y3 - 3.0 * y2 + 3.0 * y1 - y0;
    const double a1 = d1 - 0.5 * d2 + d3 / 3.0;
    const double a2 = 0.5 * d2 - 0.5 * d3;
    const double a3 = d3 / 6.0;
    const double s = static_cast<double>(k - j0);
    pieces_[k].c = {values_[k], a1 + 2.0 * a2 * s + 3.0 * a3 * s * s, a2 + 3.0 * a3 * s, a3};
    maxima[k] = piece_max(k, 0.0, 1.0);
  }
  node_max_ = SparseTable<double, MaxOp>(values_, MaxOp{});
  piece_max_ = SparseTable<double, MaxOp>(std::move(maxima), MaxOp{});
}

double QuantileGrid::piece_value(std::size_t k, double t) const {
  const auto& c = pieces_[k].c;
  return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
}

double QuantileGrid::piece_max(std::size_t k, double t_lo, double t_hi) const {
  double best = std::max(piece_value(k, t_lo), piece_value(k, t_hi));
  const auto& c = pieces_[k].c;
  // Stationary points: 3 c3 t^2 + 2 c2 t + c1 = 0.
  const double qa = 3.0 * c[3];
  const double qb = 2.0 * c[2];
  const double qc = c[1];
  auto consider = [&](double t) {
    if (t > t_lo && t < t_hi) best = std::max(best, piece_value(k, t));
  };
  if (std::abs(qa) < 1e-300) {
    if (qb != 0.0) consider(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      const double q = -0.5 * (qb + std::copysign(root, qb));
      if (q != 0.0) {
        consider(q / qa);
        consider(qc / q);
      } else {
        consider(0.0);
      }
    }
  }
  return best;
}

bool QuantileGrid::covers(double lo, double hi) const noexcept {
  const double slack = kNodeSnap * step_;
  return lo <= hi && lo >= gamma_lo_ - slack && hi <= gamma_hi() + slack;
}

double QuantileGrid::range_max(std::size_t first, std::size_t last) const {
  if (first > last || last >= values_.size()) throw RangeError("range_max: bad index range");
  return node_max_.query(first, last);
}

std::pair<std::size_t, double> QuantileGrid::locate(double gamma) const {
  const double x = (gamma - gamma_lo_) / step_;
  const double last_piece = static_cast<double>(pieces_.size() - 1);
  const double k = std::clamp(std::floor(x), 0.0, last_piece);
  return {static_cast<std::size_t>(k), std::clamp(x - k, 0.0, 1.0)};
}

double QuantileGrid::interpolate(double gamma) const {
  require_finite(gamma, "gamma");
  if (!covers(gamma, gamma)) {
    throw RangeError("gamma " + std::to_string(gamma) + " outside quantile grid");
  }
  const double x = (gamma - gamma_lo_) / step_;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < kNodeSnap) {
    return values_[static_cast<std::size_t>(
        std::clamp(nearest, 0.0, static_cast<double>(values_.size() - 1)))];
  }
  const auto [k, t] = locate(gamma);
  return piece_value(k, t);
}

double QuantileGrid::interval_sup(double lo, double hi) const {
  require_finite(lo, "interval bound");
  require_finite(hi, "interval bound");
  if (!covers(lo, hi)) {
    throw RangeError("interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     "] outside quantile grid");
  }
  if (lo == hi) return interpolate(lo);
  const auto [k_lo, t_lo] = locate(lo);
  auto [k_hi, t_hi] = locate(hi);
  // A right end sitting on a node belongs to the piece ending there.
  if (k_hi > k_lo && t_hi == 0.0) {
    --k_hi;
    t_hi = 1.0;
  }
  if (k_lo == k_hi) return piece_max(k_lo, t_lo, t_hi);
  double best = std::max(piece_max(k_lo, t_lo, 1.0), piece_max(k_hi, 0.0, t_hi));
  if (k_lo + 1 <= k_hi - 1) best = std::max(best, piece_max_.query(k_lo + 1, k_hi - 1));
  return best;
}

void QuantileGrid::write(std::ostream& out) const {
  std::string buf(kMagic, sizeof(kMagic));
  put(buf, kFormatVersion);
  put(buf, std::uint32_t{0});
  put(buf, params_.rho());
  put(buf, params_.cutoff());
  put(buf, level_.value());
  put(buf, gamma_lo_);
  put(buf, step_);
  put(buf, tol_.quad.abs_tol);
  put(buf, static_cast<std::uint64_t>(tol_.quad.max_subdivisions));
  put(buf, tol_.quantile);
  put(buf, static_cast<std::uint64_t>(values_.size()));
  for (double v : values_) put(buf, v);
  put(buf, fnv1a(buf));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing quantile grid");
}

QuantileGrid QuantileGrid::read(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CacheFormatError("not a quantile grid file");
  }
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::size_t tail = body;
  if (take<std::uint64_t>(buf, tail) != fnv1a(buf.substr(0, body))) {
    throw CacheFormatError("quantile grid checksum mismatch");
  }
  std::size_t pos = sizeof(kMagic);
  if (take<std::uint32_t>(buf, pos) != kFormatVersion) {
    throw CacheFormatError("unsupported quantile grid version");
  }
  take<std::uint32_t>(buf, pos);
  const double rho = take<double>(buf, pos);
  const double cutoff = take<double>(buf, pos);
  const double level = take<double>(buf, pos);
  const double gamma_lo = take<double>(buf, pos);
  const double step = take<double>(buf, pos);
  DistributionTolerances tol;
  tol.quad.abs_tol = take<double>(buf, pos);
  tol.quad.max_subdivisions = static_cast<std::size_t>(take<std::uint64_t>(buf, pos));
  tol.quantile = take<double>(buf, pos);
  const auto count = take<std::uint64_t>(buf, pos);
  if (count > (body - pos) / sizeof(double) || pos + count * sizeof(double) != body) {
    throw CacheFormatError("quantile grid length mismatch");
  }
  std::vector<double> values(count);
  for (auto& v : values) v = take<double>(buf, pos);
  try {
    return QuantileGrid(ModelParams(rho, cutoff), Probability(level), gamma_lo, step,
                        std::move(values), tol);
  } catch (const std::logic_error& e) {
    throw CacheFormatError(std::string("invalid quantile grid contents: ") + e.what());
  }
}

void QuantileGrid::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
}

QuantileGrid QuantileGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in);
}

QuantileGrid build_quantile_grid(const ModelParams& params, Probability v, double gamma_lo,
                                 double gamma_hi, double step, DistributionTolerances tol,
                                 unsigned threads) {
  require_finite(gamma_lo, "grid gamma_lo");
  require_finite(gamma_hi, "grid gamma_hi");
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (!(gamma_lo < gamma_hi)) throw DomainError("grid requires gamma_lo < gamma_hi");
  if (!v.is_open()) throw DomainError("grid level must satisfy 0 < v < 1");
  const auto count = static_cast<std::size_t>(std::llround((gamma_hi - gamma_lo) / step)) + 1;
  std::vector<double> values(count);
  const std::size_t blocks = (count + kBuildBlock - 1) / kBuildBlock;
  parallel_for(
      blocks,
      [&](std::size_t b) {
        std::optional<double> hint;
        const std::size_t end = std::min(count, (b + 1) * kBuildBlock);
        for (std::size_t i = b * kBuildBlock; i < end; ++i) {
          const double gamma = gamma_lo + static_cast<double>(i) * step;
          const TStatDistribution dist(params, GammaParam(gamma), tol);
          values[i] = dist.quantile(v, hint);
          hint = values[i];
        }
      },
      threads == 0 ? default_thread_count() : threads);
  return QuantileGrid(params, v, gamma_lo, step, std::move(values), tol);
}

}  // namespace postsel
