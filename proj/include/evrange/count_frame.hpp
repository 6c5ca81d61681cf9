#pragma once

#include <cstdint>
#include <numeric>

#include "evrange/grid.hpp"

namespace evrange {

/// Position of a frame's (0,0) cell in full-sensor coordinates.
struct PixelOrigin {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend bool operator==(const PixelOrigin&, const PixelOrigin&) = default;
};

/// Per-pixel event counts over one accumulation window. Rows are sensor y,
/// columns sensor x, both offset by `origin`.
struct CountFrame {
  Grid<std::uint32_t> counts;
  std::uint64_t window_start_us = 0;
  std::uint64_t window_len_us = 0;
  PixelOrigin origin;

  CountFrame() = default;
  CountFrame(std::size_t height, std::size_t width, PixelOrigin origin_ = {}, std::uint64_t start_us = 0,
             std::uint64_t len_us = 0)
      : counts(height, width, 0u), window_start_us(start_us), window_len_us(len_us), origin(origin_) {}

  std::size_t height() const noexcept { return counts.rows(); }
  std::size_t width() const noexcept { return counts.cols(); }

  std::uint32_t& operator()(std::size_t row, std::size_t col) noexcept { return counts(row, col); }
  std::uint32_t operator()(std::size_t row, std::size_t col) const noexcept { return counts(row, col); }

  std::uint64_t total() const noexcept {
    const auto v = counts.values();
    return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
  }

  friend bool operator==(const CountFrame&, const CountFrame&) = default;
};

}  // namespace evrange
