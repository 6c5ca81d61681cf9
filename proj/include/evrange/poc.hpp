#pragma once

// Phase-only correlation between two count frames.
//
//   F1, F2  = DFT of the frames
//   J       = F1 conj(F2) / |F1 conj(F2)|           (unit-magnitude cross-power)
//   G(m,n)  = (1/MN) IDFT(J)                          (POC surface)
//
// G peaks at the circular shift of frame 1 relative to frame 2. The integer
// peak is refined with a sinc-weighted centroid over its 5x5 neighborhood.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "evrange/count_frame.hpp"
#include "evrange/error.hpp"
#include "evrange/fft.hpp"
#include "evrange/grid.hpp"
#include "evrange/separation.hpp"

namespace evrange {

using Complex = std::complex<double>;
using Spectrum = Grid<Complex>;
using PocSurface = Grid<double>;

struct PocConfig {
  /// Windows whose correlation peak is below this are rejected.
  double min_peak = 0.05;
  /// Zero-pad both frames to the next power of two per axis.
  bool pad_pow2 = true;
  /// Zero-pad each axis to at least 2 * dim - 1 first, so shifts up to the
  /// full frame size do not alias under the circular unwrap.
  bool pad_linear = true;
  /// Magnitude floor of the cross-power normalization.
  double eps = 1e-12;
  /// Zero negative correlation values before the subpixel centroid. Off by
  /// default: the negative side lobes of a fractional-shift peak balance the
  /// positive ones, and dropping them biases the centroid toward the integer
  /// peak by up to ~0.15 px.
  bool clamp_negative = false;
};

struct GridIndex {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct SubpixelOffset {
  double dx = 0.0;
  double dy = 0.0;
  bool degenerate = false;
};

struct PocResult {
  GridIndex peak;
  double peak_value = 0.0;
  SubpixelOffset offset;
  /// Signed shift of frame 1 relative to frame 2, columns (x) and rows (y).
  double dx = 0.0;
  double dy = 0.0;
  double w_px = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// 2D DFT of a real array.
inline Spectrum dft2(const Grid<double>& values) {
  Spectrum s(values.rows(), values.cols());
  std::copy(values.values().begin(), values.values().end(), s.values().begin());
  fft::transform(s, fft::Direction::Forward);
  return s;
}

inline Spectrum dft2(const CountFrame& frame) {
  Spectrum s(frame.height(), frame.width());
  std::transform(frame.counts.values().begin(), frame.counts.values().end(), s.values().begin(),
                 [](std::uint32_t c) { return Complex(static_cast<double>(c), 0.0); });
  fft::transform(s, fft::Direction::Forward);
  return s;
}

/// Inverse DFT with the 1/(MN) normalization.
inline Spectrum idft2(Spectrum s) {
  fft::transform(s, fft::Direction::Inverse);
  const double scale = 1.0 / static_cast<double>(s.size());
  for (auto& v : s.values()) v *= scale;
  return s;
}

/// Normalized cross-power spectrum F1 conj(F2) / max(|F1 conj(F2)|, eps).
inline Spectrum cross_power(const Spectrum& f1, const Spectrum& f2, double eps = 1e-12) {
  if (f1.rows() != f2.rows() || f1.cols() != f2.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "cross_power: spectra are " + std::to_string(f1.rows()) + "x" +
                                                  std::to_string(f1.cols()) + " and " + std::to_string(f2.rows()) +
                                                  "x" + std::to_string(f2.cols()));
  }
  Spectrum j(f1.rows(), f1.cols());
  const auto a = f1.values();
  const auto b = f2.values();
  auto out = j.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Complex p = a[i] * std::conj(b[i]);
    out[i] = p / std::max(std::abs(p), eps);
  }
  return j;
}

inline constexpr double kImagResidueTolerance = 1e-9;

/// Real part of the normalized inverse DFT of J. Throws NumericalIntegrity if
/// any cell keeps an imaginary part above 1e-9.
inline PocSurface poc_surface(const Spectrum& j) {
  const Spectrum g = idft2(j);
  PocSurface out(g.rows(), g.cols());
  auto dst = out.values();
  const auto src = g.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (std::abs(src[i].imag()) >= kImagResidueTolerance) {
      throw Error(ErrorKind::NumericalIntegrity, "POC surface cell " + std::to_string(i) +
                                                     " has imaginary residue " + std::to_string(src[i].imag()));
    }
    dst[i] = src[i].real();
  }
  return out;
}

/// First maximum in row-major order.
inline GridIndex argmax(const PocSurface& g) {
  const auto v = g.values();
  const auto it = std::max_element(v.begin(), v.end());
  const auto i = static_cast<std::size_t>(it - v.begin());
  return {i / g.cols(), i % g.cols()};
}

/// Maps a circular index to a signed shift in (-dim/2, dim/2].
inline std::ptrdiff_t unwrap_index(std::size_t index, std::size_t dim) noexcept {
  const auto i = static_cast<std::ptrdiff_t>(index);
  return 2 * index > dim ? i - static_cast<std::ptrdiff_t>(dim) : i;
}

/// Unnormalized sinc weights sin(k)/k for k = -2..2.
inline std::array<double, 5> sinc_weights() noexcept {
  std::array<double, 5> w{};
  for (int k = -2; k <= 2; ++k) {
    w[static_cast<std::size_t>(k + 2)] = k == 0 ? 1.0 : std::sin(static_cast<double>(k)) / k;
  }
  return w;
}

/// Sinc-weighted centroid of the 5x5 neighborhood of `peak` (circular
/// indexing). Offsets are relative to the peak, in [-2, 2] per axis.
inline SubpixelOffset refine_subpixel(const PocSurface& g, GridIndex peak, bool clamp_negative = false) {
  const auto w = sinc_weights();
  const auto rows = static_cast<std::ptrdiff_t>(g.rows());
  const auto cols = static_cast<std::ptrdiff_t>(g.cols());
  double sum = 0.0, sum_x = 0.0, sum_y = 0.0;
  for (int ky = -2; ky <= 2; ++ky) {
    const auto r = static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(peak.row) + ky) % rows + rows) % rows);
    for (int kx = -2; kx <= 2; ++kx) {
      const auto c = static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(peak.col) + kx) % cols + cols) % cols);
      double v = g(r, c);
      if (clamp_negative) v = std::max(v, 0.0);
      const double weighted = v * w[static_cast<std::size_t>(kx + 2)] * w[static_cast<std::size_t>(ky + 2)];
      sum += weighted;
      sum_x += weighted * kx;
      sum_y += weighted * ky;
    }
  }
  if (std::abs(sum) <= 1e-12) return {0.0, 0.0, true};
  return {sum_x / sum, sum_y / sum, false};
}

namespace detail {

inline std::size_t next_pow2(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 1)); }

inline std::size_t padded_size(std::size_t dim, const PocConfig& cfg) {
  const std::size_t linear = cfg.pad_linear ? 2 * dim - 1 : dim;
  return cfg.pad_pow2 ? next_pow2(linear) : linear;
}

inline Spectrum padded_spectrum(const CountFrame& frame, std::size_t rows, std::size_t cols) {
  Spectrum s(rows, cols);
  for (std::size_t r = 0; r < frame.height(); ++r) {
    const auto src = frame.counts.row(r);
    auto dst = s.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = Complex(static_cast<double>(src[c]), 0.0);
  }
  fft::transform(s, fft::Direction::Forward);
  return s;
}

}  // namespace detail

/// Full correlation of `moved` against `reference`: the result is the shift
/// that carries `reference` onto `moved`. Does not apply the min_peak gate.
inline PocResult correlate(const CountFrame& reference, const CountFrame& moved, const PocConfig& cfg = {}) {
  if (reference.height() != moved.height() || reference.width() != moved.width()) {
    throw Error(ErrorKind::DimensionMismatch, "correlate: frames differ in size");
  }
  if (reference.height() == 0 || reference.width() == 0) {
    throw Error(ErrorKind::DegenerateInput, "correlate: empty frame");
  }
  const std::size_t rows = detail::padded_size(reference.height(), cfg);
  const std::size_t cols = detail::padded_size(reference.width(), cfg);

  const Spectrum f_moved = detail::padded_spectrum(moved, rows, cols);
  const Spectrum f_ref = detail::padded_spectrum(reference, rows, cols);
  const PocSurface g = poc_surface(cross_power(f_moved, f_ref, cfg.eps));

  PocResult res;
  res.rows = rows;
  res.cols = cols;
  res.peak = argmax(g);
  res.peak_value = g(res.peak.row, res.peak.col);
  res.offset = refine_subpixel(g, res.peak, cfg.clamp_negative);
  res.dx = static_cast<double>(unwrap_index(res.peak.col, cols)) + res.offset.dx;
  res.dy = static_cast<double>(unwrap_index(res.peak.row, rows)) + res.offset.dy;
  res.w_px = std::hypot(res.dx, res.dy);
  return res;
}

/// Displacement of the lower LED group relative to the upper one. Positive
/// dy means the lower group sits further down the sensor.
inline PocResult measure_displacement(const SplitFrames& split, const PocConfig& cfg = {}) {
  PocResult res = correlate(split.upper, split.lower, cfg);
  if (!(res.peak_value >= cfg.min_peak)) {
    throw Error(ErrorKind::LowConfidence, "correlation peak " + std::to_string(res.peak_value) + " below poc.min_peak " +
                                              std::to_string(cfg.min_peak));
  }
  return res;
}

/// Debug dump: one CSV row per surface row.
inline void write_surface_csv(const PocSurface& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.precision(17);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (c) out << ',';
      out << g(r, c);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace evrange
