#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace evrange {

/// Dense row-major 2D array.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, const T& fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) noexcept {
    assert(row < rows_ && col < cols_);
    return data_[row * cols_ + col];
  }
  const T& operator()(std::size_t row, std::size_t col) const noexcept {
    assert(row < rows_ && col < cols_);
    return data_[row * cols_ + col];
  }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace evrange
