#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "evrange/count_frame.hpp"
#include "evrange/error.hpp"
#include "evrange/event.hpp"

namespace evrange {

enum class PolarityMode { Both, Positive, Negative };

struct AccumulateConfig {
  std::uint64_t window_us = 3000;
  PolarityMode polarity = PolarityMode::Both;
};

/// Streaming fold of events into fixed, t = 0 aligned count windows.
///
/// Frames span the whole sensor. Every window between the first and the last
/// observed timestamp is emitted, including empty ones, so frame index k
/// always covers [k * window_us, (k + 1) * window_us). The emitted frame is
/// a reused buffer; sinks must copy what they keep.
class FrameAccumulator {
 public:
  FrameAccumulator(SensorGeometry geometry, AccumulateConfig cfg)
      : cfg_(cfg), frame_(geometry.height, geometry.width, {}, 0, cfg.window_us) {
    if (cfg.window_us == 0) {
      throw Error(ErrorKind::Config, "accumulate.window_us must be > 0");
    }
  }

  /// Emits all windows that end at or before `t` and makes the window
  /// containing `t` current.
  template <typename Sink>
  void advance_to(std::uint64_t t, Sink&& sink) {
    const std::uint64_t index = t / cfg_.window_us;
    if (!started_) {
      started_ = true;
      next_index_ = 0;
    }
    while (next_index_ < index) {
      emit(sink);
    }
  }

  /// Counts `e` into its window, emitting any windows it closes first.
  template <typename Sink>
  void add(const Event& e, Sink&& sink) {
    advance_to(e.t, sink);
    if (!counts(e.polarity)) return;
    ++frame_(e.y, e.x);
    if (!dirty_) {
      min_x_ = max_x_ = e.x;
      min_y_ = max_y_ = e.y;
      dirty_ = true;
    } else {
      min_x_ = std::min<std::uint32_t>(min_x_, e.x);
      max_x_ = std::max<std::uint32_t>(max_x_, e.x);
      min_y_ = std::min<std::uint32_t>(min_y_, e.y);
      max_y_ = std::max<std::uint32_t>(max_y_, e.y);
    }
  }

  /// Emits the current window, if any timestamp has been seen.
  template <typename Sink>
  void finish(Sink&& sink) {
    if (started_) {
      emit(sink);
      started_ = false;
    }
  }

  bool counts(Polarity p) const noexcept {
    switch (cfg_.polarity) {
      case PolarityMode::Both: return true;
      case PolarityMode::Positive: return p == Polarity::Positive;
      case PolarityMode::Negative: return p == Polarity::Negative;
    }
    return true;
  }

 private:
  template <typename Sink>
  void emit(Sink& sink) {
    frame_.window_start_us = next_index_ * cfg_.window_us;
    sink(static_cast<const CountFrame&>(frame_));
    if (dirty_) {
      for (std::uint32_t y = min_y_; y <= max_y_; ++y) {
        auto row = frame_.counts.row(y);
        std::fill(row.begin() + min_x_, row.begin() + max_x_ + 1, 0u);
      }
      dirty_ = false;
    }
    ++next_index_;
  }

  AccumulateConfig cfg_;
  CountFrame frame_;
  std::uint64_t next_index_ = 0;
  bool started_ = false;
  bool dirty_ = false;
  std::uint32_t min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0;
};

/// Accumulates a whole stream into full-sensor frames. Holds every frame in
/// memory; the pipeline uses FrameAccumulator directly instead.
inline std::vector<CountFrame> accumulate(const EventStream& stream, std::uint64_t window_len_us,
                                          PolarityMode polarity = PolarityMode::Both) {
  FrameAccumulator acc(stream.geometry, {window_len_us, polarity});
  std::vector<CountFrame> frames;
  auto keep = [&](const CountFrame& f) { frames.push_back(f); };
  for (const Event& e : stream.events) acc.add(e, keep);
  acc.finish(keep);
  return frames;
}

/// Crops to the bounding box of nonzero cells, grown by `margin` and clamped
/// to the frame. Throws EmptyRoi for an all-zero frame.
inline CountFrame crop_to_roi(const CountFrame& frame, std::uint32_t margin = 4) {
  std::size_t min_r = std::numeric_limits<std::size_t>::max(), max_r = 0;
  std::size_t min_c = std::numeric_limits<std::size_t>::max(), max_c = 0;
  for (std::size_t r = 0; r < frame.height(); ++r) {
    const auto row = frame.counts.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] == 0) continue;
      min_r = std::min(min_r, r);
      max_r = std::max(max_r, r);
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
    }
  }
  if (min_r > max_r) {
    throw Error(ErrorKind::EmptyRoi, "window at " + std::to_string(frame.window_start_us) + " us has no events");
  }
  min_r = min_r >= margin ? min_r - margin : 0;
  min_c = min_c >= margin ? min_c - margin : 0;
  max_r = std::min(max_r + margin, frame.height() - 1);
  max_c = std::min(max_c + margin, frame.width() - 1);

  CountFrame roi(max_r - min_r + 1, max_c - min_c + 1,
                 {frame.origin.x + static_cast<std::uint32_t>(min_c), frame.origin.y + static_cast<std::uint32_t>(min_r)},
                 frame.window_start_us, frame.window_len_us);
  for (std::size_t r = 0; r < roi.height(); ++r) {
    const auto src = frame.counts.row(min_r + r).subspan(min_c, roi.width());
    std::copy(src.begin(), src.end(), roi.counts.row(r).begin());
  }
  return roi;
}

/// Places an ROI frame back into a zeroed full-sensor frame.
inline CountFrame embed(const CountFrame& roi, SensorGeometry geometry) {
  CountFrame full(geometry.height, geometry.width, {}, roi.window_start_us, roi.window_len_us);
  for (std::size_t r = 0; r < roi.height(); ++r) {
    for (std::size_t c = 0; c < roi.width(); ++c) {
      const std::size_t y = roi.origin.y + r, x = roi.origin.x + c;
      if (y < full.height() && x < full.width()) full(y, x) = roi(r, c);
    }
  }
  return full;
}

/// Debug dump as a binary 16-bit PGM; counts above 65535 are clamped.
inline void write_pgm16(const CountFrame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n65535\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(frame.counts.size() * 2);
  for (const std::uint32_t c : frame.counts.values()) {
    const auto v = static_cast<std::uint16_t>(std::min<std::uint32_t>(c, 0xFFFF));
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace evrange
