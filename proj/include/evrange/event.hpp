#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "evrange/error.hpp"

namespace evrange {

enum class Polarity : std::uint8_t { Negative = 0, Positive = 1 };

/// One camera event. `t` is microseconds since recording start.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint64_t t = 0;
  Polarity polarity = Polarity::Positive;

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
  std::uint16_t width = 1280;
  std::uint16_t height = 720;

  bool contains(std::uint32_t x, std::uint32_t y) const noexcept { return x < width && y < height; }
  std::size_t pixel_count() const noexcept { return std::size_t{width} * height; }
  std::size_t index(std::uint32_t x, std::uint32_t y) const noexcept { return std::size_t{y} * width + x; }

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// A time-ordered sequence of events for one sensor.
struct EventStream {
  SensorGeometry geometry;
  std::vector<Event> events;

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

/// Throws if the geometry is empty, an event lies outside it, or timestamps
/// go backwards.
inline void validate(const EventStream& stream) {
  if (stream.geometry.width == 0 || stream.geometry.height == 0) {
    throw Error(ErrorKind::Config, "sensor geometry must be at least 1x1");
  }
  std::uint64_t last_t = 0;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    if (!stream.geometry.contains(e.x, e.y)) {
      throw Error(ErrorKind::OutOfBounds, "event " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
                                              std::to_string(e.y) + ") is outside the sensor");
    }
    if (e.t < last_t) {
      throw Error(ErrorKind::Ordering, "event " + std::to_string(i) + " timestamp " + std::to_string(e.t) +
                                           " precedes " + std::to_string(last_t));
    }
    last_t = e.t;
  }
}

}  // namespace evrange
