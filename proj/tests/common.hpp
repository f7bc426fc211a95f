#pragma once

#include "postsel/grid_store.hpp"

namespace testing {

// One store for the whole unit-test binary so grids are built once.
inline postsel::GridStore& shared_store() {
  static postsel::GridStore store;
  return store;
}

}  // namespace testing
