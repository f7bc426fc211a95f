#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include "postsel/quantile_grid.hpp"

namespace postsel {

// gamma range and spacing of every grid a store builds. The default covers
// the sup search over [-40, 40] plus a 12-sigma sweep of gamma_hat around it
// and confidence half-widths up to 8.
struct GridSpec {
  double gamma_lo = -60.0;
  double gamma_hi = 60.0;
  double step = 0.01;
  DistributionTolerances tol{};
  unsigned threads = 0;
};

struct GridStoreStats {
  std::size_t memory_hits = 0;
  std::size_t disk_hits = 0;
  std::size_t builds = 0;
  std::size_t rejected_files = 0;
};

// Lazily built, shared quantile grids keyed by (rho, c, level, range, step,
// tolerances). With a cache directory, grids are also persisted; files that
// fail validation are discarded and rebuilt. Thread-safe.
class GridStore {
 public:
  explicit GridStore(GridSpec spec = {}, std::optional<std::filesystem::path> cache_dir = {});

  const GridSpec& spec() const noexcept { return spec_; }
  std::shared_ptr<const QuantileGrid> get(const ModelParams& params, Probability level);
  GridStoreStats stats() const;
  // File name used for the grid with this key inside the cache directory.
  std::filesystem::path cache_file(const ModelParams& params, Probability level) const;

 private:
  using Key = std::tuple<double, double, double>;

  GridSpec spec_;
  std::optional<std::filesystem::path> cache_dir_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const QuantileGrid>> grids_;
  GridStoreStats stats_;
};

// Default cache directory: $POSTSEL_CACHE_DIR if set.
std::optional<std::filesystem::path> cache_dir_from_env();

}  // namespace postsel
