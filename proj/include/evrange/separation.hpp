#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "evrange/count_frame.hpp"
#include "evrange/error.hpp"

namespace evrange {

/// The two LED groups of one ROI frame. Both frames keep the full ROI size
/// and origin; the rows belonging to the other group are zero.
struct SplitFrames {
  CountFrame upper;
  CountFrame lower;
  /// Full-sensor row of the boundary.
  double boundary_y = 0.0;
};

/// Count-weighted mean row of the frame, in full-sensor coordinates.
inline double weighted_y(const CountFrame& frame) {
  // Integer accumulation keeps the result exactly invariant under count scaling.
  std::uint64_t mass = 0;
  unsigned __int128 moment = 0;
  for (std::size_t r = 0; r < frame.height(); ++r) {
    std::uint64_t row_mass = 0;
    for (const std::uint32_t c : frame.counts.row(r)) row_mass += c;
    mass += row_mass;
    moment += static_cast<unsigned __int128>(row_mass) * (frame.origin.y + r);
  }
  if (mass == 0) {
    throw Error(ErrorKind::DegenerateInput, "weighted row of an all-zero frame is undefined");
  }
  const auto whole = static_cast<std::uint64_t>(moment / mass);
  const auto rem = static_cast<std::uint64_t>(moment % mass);
  return static_cast<double>(whole) + static_cast<double>(rem) / static_cast<double>(mass);
}

/// Splits at the weighted mean row: rows strictly above it go to `upper`,
/// the rest (including a row exactly on it) to `lower`.
inline SplitFrames split(const CountFrame& frame) {
  const double boundary = weighted_y(frame);
  const double local = boundary - frame.origin.y;
  const auto first_lower = static_cast<std::size_t>(std::ceil(local));

  SplitFrames out{frame, frame, boundary};
  std::uint64_t upper_mass = 0, lower_mass = 0;
  for (std::size_t r = 0; r < frame.height(); ++r) {
    auto& zeroed = r < first_lower ? out.lower : out.upper;
    auto& kept = r < first_lower ? upper_mass : lower_mass;
    for (auto& c : zeroed.counts.row(r)) {
      kept += c;
      c = 0;
    }
  }
  if (upper_mass == 0 || lower_mass == 0) {
    throw Error(ErrorKind::SeparationFailure,
                "all event mass lies on one side of row " + std::to_string(boundary) + "; cannot separate LED groups");
  }
  return out;
}

/// True when no counts lie on the rows adjacent to the boundary, i.e. the
/// weighted row falls in an empty gap between the two LED groups. A single
/// group straddles its own weighted row and fails this check.
inline bool boundary_in_gap(const CountFrame& frame, double boundary_y) {
  const double local = boundary_y - frame.origin.y;
  const auto above = static_cast<std::ptrdiff_t>(std::floor(local));
  const auto below = static_cast<std::ptrdiff_t>(std::ceil(local));
  for (const std::ptrdiff_t r : {above, below}) {
    if (r < 0 || r >= static_cast<std::ptrdiff_t>(frame.height())) continue;
    for (const std::uint32_t c : frame.counts.row(static_cast<std::size_t>(r))) {
      if (c != 0) return false;
    }
  }
  return true;
}

}  // namespace evrange
