#include "postsel/grid_store.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace postsel {

namespace {

std::uint64_t mix(std::uint64_t h, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffU;
    h *= 1099511628211ULL;
  }
  return h;
}

bool same_key(const QuantileGrid& grid, const ModelParams& params, Probability level,
              const GridSpec& spec) {
  return grid.params() == params && grid.level() == level && grid.gamma_lo() == spec.gamma_lo &&
         grid.step() == spec.step && grid.tolerances() == spec.tol &&
         grid.size() ==
             static_cast<std::size_t>(std::llround((spec.gamma_hi - spec.gamma_lo) / spec.step)) + 1;
}

}  // namespace

GridStore::GridStore(GridSpec spec, std::optional<std::filesystem::path> cache_dir)
    : spec_(spec), cache_dir_(std::move(cache_dir)) {
  if (!(spec_.step > 0.0) || !(spec_.gamma_lo < spec_.gamma_hi)) {
    throw DomainError("grid spec needs gamma_lo < gamma_hi and a positive step");
  }
  if (cache_dir_) {
    std::filesystem::create_directories(*cache_dir_);
    if (!std::filesystem::is_directory(*cache_dir_)) {
      throw std::runtime_error("cache path is not a directory: " + cache_dir_->string());
    }
  }
}

std::filesystem::path GridStore::cache_file(const ModelParams& params, Probability level) const {
  std::uint64_t h = 1469598103934665603ULL;
  for (double x : {params.rho(), params.cutoff(), level.value(), spec_.gamma_lo, spec_.gamma_hi,
                   spec_.step, spec_.tol.quad.abs_tol,
                   static_cast<double>(spec_.tol.quad.max_subdivisions), spec_.tol.quantile}) {
    h = mix(h, x);
  }
  std::ostringstream name;
  name << "qgrid-" << std::hex << std::setw(16) << std::setfill('0') << h << ".bin";
  return cache_dir_.value_or(std::filesystem::path{}) / name.str();
}

std::shared_ptr<const QuantileGrid> GridStore::get(const ModelParams& params, Probability level) {
  std::lock_guard lock(mutex_);
  const Key key{params.rho(), params.cutoff(), level.value()};
  if (auto it = grids_.find(key); it != grids_.end()) {
    ++stats_.memory_hits;
    return it->second;
  }

  std::shared_ptr<const QuantileGrid> grid;
  if (cache_dir_) {
    const auto path = cache_file(params, level);
    if (std::filesystem::exists(path)) {
      try {
        auto loaded = std::make_shared<const QuantileGrid>(QuantileGrid::load(path));
        if (same_key(*loaded, params, level, spec_)) {
          grid = std::move(loaded);
          ++stats_.disk_hits;
        } else {
          ++stats_.rejected_files;
        }
      } catch (const CacheFormatError&) {
        ++stats_.rejected_files;
      }
    }
  }
  if (!grid) {
    grid = std::make_shared<const QuantileGrid>(build_quantile_grid(
        params, level, spec_.gamma_lo, spec_.gamma_hi, spec_.step, spec_.tol, spec_.threads));
    ++stats_.builds;
    if (cache_dir_) {
      const auto path = cache_file(params, level);
      auto partial = path;
      partial += ".tmp";
      grid->save(partial);
      std::filesystem::rename(partial, path);
    }
  }
  grids_.emplace(key, grid);
  return grid;
}

GridStoreStats GridStore::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::optional<std::filesystem::path> cache_dir_from_env() {
  if (const char* dir = std::getenv("POSTSEL_CACHE_DIR"); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir);
  }
  return std::nullopt;
}

}  // namespace postsel
