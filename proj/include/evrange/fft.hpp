#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>

#include "evrange/grid.hpp"

namespace evrange::fft {

using Complex = std::complex<double>;

enum class Direction { Forward = FFTW_FORWARD, Inverse = FFTW_BACKWARD };

namespace detail {
// FFTW's planner is not reentrant; plan execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Unnormalized in-place 2D DFT, exp(-j...) for Forward, exp(+j...) for Inverse.
inline void transform(Grid<Complex>& data, Direction dir) {
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(data.rows()), static_cast<int>(data.cols()), buf, buf,
                            static_cast<int>(dir), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(detail::planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace evrange::fft
