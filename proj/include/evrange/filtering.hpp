#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "evrange/count_frame.hpp"
#include "evrange/error.hpp"
#include "evrange/event.hpp"

namespace evrange {

struct HighPassConfig {
  /// An event survives only if its pixel fired within this many
  /// microseconds before it.
  std::uint64_t cutoff_period_us = 2000;
};

struct CountThresholdConfig {
  std::uint32_t min_count = 2;
};

/// Per-pixel inter-event-interval gate. An event at time t survives when its
/// pixel (either polarity) fired at some time in the open interval
/// (t - cutoff, t). The first event ever seen at a pixel is dropped.
/// Stateful and causal; feed events in time order.
class HighPassFilter {
 public:
  HighPassFilter(SensorGeometry geometry, HighPassConfig cfg)
      : geometry_(geometry), cutoff_(cfg.cutoff_period_us), state_(geometry.pixel_count()) {
    if (cfg.cutoff_period_us == 0) {
      throw Error(ErrorKind::Config, "filter.highpass_cutoff_us must be > 0");
    }
  }

  /// Updates the pixel state and reports whether `e` passes.
  bool accept(const Event& e) noexcept {
    // Timestamps are stored as t + 1 so that zero means "never fired".
    // `earlier` is the latest time strictly before `latest`, needed when
    // several events share one timestamp.
    PixelState& s = state_[geometry_.index(e.x, e.y)];
    const std::uint64_t stamp = e.t + 1;
    if (stamp != s.latest) {
      s.earlier = s.latest;
      s.latest = stamp;
    }
    return s.earlier != 0 && stamp - s.earlier < cutoff_;
  }

  /// Appends the surviving events of `events` to `out`.
  void filter(std::span<const Event> events, std::vector<Event>& out) {
    for (const Event& e : events) {
      if (accept(e)) out.push_back(e);
    }
  }

  void reset() { std::fill(state_.begin(), state_.end(), PixelState{}); }

  const SensorGeometry& geometry() const noexcept { return geometry_; }

 private:
  SensorGeometry geometry_;
  std::uint64_t cutoff_;
  struct PixelState {
    std::uint64_t latest = 0;
    std::uint64_t earlier = 0;
  };

  std::vector<PixelState> state_;
};

inline EventStream high_pass(const EventStream& stream, HighPassConfig cfg) {
  HighPassFilter hp(stream.geometry, cfg);
  EventStream out{stream.geometry, {}};
  out.events.reserve(stream.events.size());
  hp.filter(stream.events, out.events);
  return out;
}

/// Zeroes every cell whose count is below `min_count`.
inline CountFrame count_threshold(CountFrame frame, CountThresholdConfig cfg) {
  if (cfg.min_count == 0) return frame;
  for (auto& c : frame.counts.values()) {
    if (c < cfg.min_count) c = 0;
  }
  return frame;
}

}  // namespace evrange
