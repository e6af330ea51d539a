#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace favedge {

/// Dense array over an integer interval that grows by doubling on either end.
/// Entries outside the allocated interval read as T{}.
template <class T>
class OffsetArray {
 public:
  OffsetArray() { data_.assign(16, T{}); origin_ = 8; }

  T get(std::int64_t i) const noexcept {
    const std::int64_t k = i + origin_;
    if (k < 0 || k >= static_cast<std::int64_t>(data_.size())) return T{};
    return data_[static_cast<std::size_t>(k)];
  }

  /// Mutable access; grows storage when `i` lies outside.
  T& operator[](std::int64_t i) {
    std::int64_t k = i + origin_;
    if (k < 0 || k >= static_cast<std::int64_t>(data_.size())) {
      grow_to(i);
      k = i + origin_;
    }
    return data_[static_cast<std::size_t>(k)];
  }

  /// Unchecked access for indices known to be allocated.
  T& at_unchecked(std::int64_t i) noexcept {
    return data_[static_cast<std::size_t>(i + origin_)];
  }

  bool covers(std::int64_t i) const noexcept {
    const std::int64_t k = i + origin_;
    return k >= 0 && k < static_cast<std::int64_t>(data_.size());
  }

  void clear() { std::fill(data_.begin(), data_.end(), T{}); }

  std::int64_t lowest() const noexcept { return -origin_; }
  std::int64_t highest() const noexcept {
    return static_cast<std::int64_t>(data_.size()) - origin_ - 1;
  }

 private:
  void grow_to(std::int64_t i) {
    const auto size = static_cast<std::int64_t>(data_.size());
    std::int64_t lo = -origin_;
    std::int64_t hi = size - origin_ - 1;
    std::int64_t new_size = size;
    while (i < lo || i > hi) {
      new_size *= 2;
      if (i < lo) lo = hi - new_size + 1;
      else hi = lo + new_size - 1;
    }
    std::vector<T> grown(static_cast<std::size_t>(new_size), T{});
    const std::int64_t shift = -lo - origin_;
    std::copy(data_.begin(), data_.end(),
              grown.begin() + static_cast<std::ptrdiff_t>(shift));
    data_ = std::move(grown);
    origin_ = -lo;
  }

  std::vector<T> data_;
  std::int64_t origin_ = 0;
};

}  // namespace favedge
