#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "postsel/grid_store.hpp"

using namespace postsel;
namespace fs = std::filesystem;

namespace {

GridSpec small_spec() {
  GridSpec spec;
  spec.gamma_lo = -5.0;
  spec.gamma_hi = 5.0;
  spec.step = 0.1;
  return spec;
}

fs::path fresh_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("grids are memoised in memory") {
  GridStore store(small_spec());
  const ModelParams p(0.5, 1.0);
  const auto a = store.get(p, Probability(0.05));
  const auto b = store.get(p, Probability(0.05));
  CHECK(a == b);
  store.get(p, Probability(0.04));
  const auto s = store.stats();
  CHECK(s.builds == 2);
  CHECK(s.memory_hits == 1);
  CHECK(s.disk_hits == 0);
}

TEST_CASE("grids persist across stores") {
  const auto dir = fresh_dir("postsel-store-test");
  const ModelParams p(0.5, 1.0);
  std::vector<double> first;
  {
    GridStore store(small_spec(), dir);
    first = store.get(p, Probability(0.05))->values();
    CHECK(fs::exists(store.cache_file(p, Probability(0.05))));
  }
  GridStore again(small_spec(), dir);
  CHECK(again.get(p, Probability(0.05))->values() == first);
  CHECK(again.stats().disk_hits == 1);
  CHECK(again.stats().builds == 0);

  // Different tolerances map to a different file.
  auto spec = small_spec();
  spec.tol.quantile = 1e-9;
  GridStore other(spec, dir);
  CHECK(other.cache_file(p, Probability(0.05)) != again.cache_file(p, Probability(0.05)));
  fs::remove_all(dir);
}

TEST_CASE("a corrupted cache file is rebuilt") {
  const auto dir = fresh_dir("postsel-store-corrupt");
  const ModelParams p(-0.3, 1.96);
  fs::path file;
  {
    GridStore store(small_spec(), dir);
    store.get(p, Probability(0.1));
    file = store.cache_file(p, Probability(0.1));
  }
  {
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(80);
    f.put('\x7f');
  }
  GridStore store(small_spec(), dir);
  store.get(p, Probability(0.1));
  CHECK(store.stats().rejected_files == 1);
  CHECK(store.stats().builds == 1);
  GridStore third(small_spec(), dir);
  third.get(p, Probability(0.1));
  CHECK(third.stats().disk_hits == 1);
  fs::remove_all(dir);
}

TEST_CASE("cache directory from the environment") {
  ::setenv("POSTSEL_CACHE_DIR", "/tmp/somewhere", 1);
  CHECK(cache_dir_from_env() == fs::path("/tmp/somewhere"));
  ::setenv("POSTSEL_CACHE_DIR", "", 1);
  CHECK_FALSE(cache_dir_from_env().has_value());
  ::unsetenv("POSTSEL_CACHE_DIR");
  CHECK_FALSE(cache_dir_from_env().has_value());
}
