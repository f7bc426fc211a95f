#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace postsel {

// Doubling table for idempotent range queries (max/min): O(n log n) build,
// O(1) query over any inclusive index range.
template <class T, class Op = std::function<T(const T&, const T&)>>
class SparseTable {
 public:
  SparseTable() = default;

  SparseTable(std::vector<T> values, Op op) : op_(std::move(op)) {
    const std::size_t n = values.size();
    if (n == 0) return;
    const int levels = std::bit_width(n);
    table_.resize(levels);
    table_[0] = std::move(values);
    for (int k = 1; k < levels; ++k) {
      const std::size_t span = std::size_t{1} << k;
      const std::size_t half = span >> 1;
      table_[k].resize(n - span + 1);
      for (std::size_t i = 0; i + span <= n; ++i) {
        table_[k][i] = op_(table_[k - 1][i], table_[k - 1][i + half]);
      }
    }
  }

  std::size_t size() const noexcept { return table_.empty() ? 0 : table_[0].size(); }

  // Combines values[first..last], both inclusive; requires first <= last < size().
  T query(std::size_t first, std::size_t last) const {
    const std::size_t len = last - first + 1;
    const int k = std::bit_width(len) - 1;
    return op_(table_[k][first], table_[k][last + 1 - (std::size_t{1} << k)]);
  }

 private:
  Op op_;
  std::vector<std::vector<T>> table_;
};

}  // namespace postsel
