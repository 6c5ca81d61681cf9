#pragma once

// Synthetic drive-by recordings of a blinking LED bar with exact ground truth.
//
// Coordinates: the bar-local frame has x to the right, y up and z away from
// the camera, in meters. The bar origin sits at (lateral_m, height_m,
// distance(t)) in camera coordinates, where distance(t) = initial - speed * t.
// Image rows grow downward. Each LED blinks as a square wave; every edge emits
// Poisson-distributed events with a Gaussian spatial profile around the
// projected spot. The camera's vertical vibration shifts all spots equally.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "evrange/config.hpp"
#include "evrange/error.hpp"
#include "evrange/event.hpp"
#include "evrange/ranging.hpp"

namespace evrange {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

enum class LedGroup { Upper, Lower };

struct Led {
  Vec3 position;
  double freq_hz = 5000.0;
  LedGroup group = LedGroup::Upper;
};

struct Trajectory {
  double initial_distance_m = 60.0;
  double speed_mps = 5.56;
  double lateral_m = 1.5;
  double height_m = -0.25;
  double duration_s = 7.194;

  double distance_at(double t_s) const noexcept { return initial_distance_m - speed_mps * t_s; }
};

/// Sinusoidal vertical image shift with the given amplitude and peak slope.
struct Vibration {
  double amplitude_px = 1.0;
  double rate_px_per_ms = 1.5;

  double offset_px(double t_us) const noexcept {
    if (amplitude_px <= 0.0) return 0.0;
    return amplitude_px * std::sin(rate_px_per_ms / amplitude_px * (t_us / 1000.0));
  }
};

struct ScenarioConfig {
  std::vector<Led> leds;
  Trajectory trajectory;
  Vibration vibration;
  /// Uniform background events per second over the whole sensor.
  double noise_rate_eps = 1e6;
  double psf_sigma_px = 1.5;
  /// Mean events per pixel per blink edge at the spot center.
  double events_per_edge = 1.0;
  double jitter_us = 50.0;
  OpticalConfig optics{0.035, 4.86e-6, 0.91};
  SensorGeometry geometry;
  std::uint64_t seed = 1;
  /// Ground-truth window length; match the estimator's accumulate.window_us.
  std::uint64_t window_us = 3000;

  /// 96 LEDs at 1 cm pitch, the 5 topmost forming the upper group and the
  /// 5 bottommost the lower group, each blinking 5/10/20/10/5 kHz top to
  /// bottom. Group centroids are 0.91 m apart.
  static std::vector<Led> standard_bar() {
    constexpr double kPitch = 0.01;
    constexpr std::array<double, 5> kFreqs = {5000.0, 10000.0, 20000.0, 10000.0, 5000.0};
    std::vector<Led> leds;
    for (int i = 0; i < 5; ++i) {
      leds.push_back({{0.0, (95 - i) * kPitch, 0.0}, kFreqs[static_cast<std::size_t>(i)], LedGroup::Upper});
    }
    for (int i = 0; i < 5; ++i) {
      leds.push_back({{0.0, (4 - i) * kPitch, 0.0}, kFreqs[static_cast<std::size_t>(i)], LedGroup::Lower});
    }
    return leds;
  }

  /// Reads a scenario file. LEDs come from `led.<n> = x y z freq_hz upper|lower`
  /// entries; without any, the standard bar is used.
  static ScenarioConfig from(const KeyValueConfig& kv) {
    ScenarioConfig cfg;
    cfg.geometry.width = static_cast<std::uint16_t>(kv.get_uint("sensor.width", cfg.geometry.width));
    cfg.geometry.height = static_cast<std::uint16_t>(kv.get_uint("sensor.height", cfg.geometry.height));
    cfg.optics.focal_length_m = kv.get_double("optics.focal_length_m", cfg.optics.focal_length_m);
    cfg.optics.pixel_pitch_m = kv.get_double("optics.pixel_pitch_m", cfg.optics.pixel_pitch_m);
    cfg.optics.baseline_m = kv.get_double("optics.baseline_m", cfg.optics.baseline_m);
    cfg.trajectory.initial_distance_m = kv.get_double("trajectory.initial_distance_m", cfg.trajectory.initial_distance_m);
    cfg.trajectory.speed_mps = kv.get_double("trajectory.speed_mps", cfg.trajectory.speed_mps);
    cfg.trajectory.lateral_m = kv.get_double("trajectory.lateral_m", cfg.trajectory.lateral_m);
    cfg.trajectory.height_m = kv.get_double("trajectory.height_m", cfg.trajectory.height_m);
    cfg.trajectory.duration_s = kv.get_double("trajectory.duration_s", cfg.trajectory.duration_s);
    cfg.vibration.amplitude_px = kv.get_double("vibration.amplitude_px", cfg.vibration.amplitude_px);
    cfg.vibration.rate_px_per_ms = kv.get_double("vibration.rate_px_per_ms", cfg.vibration.rate_px_per_ms);
    cfg.noise_rate_eps = kv.get_double("noise.rate_eps", cfg.noise_rate_eps);
    cfg.psf_sigma_px = kv.get_double("psf.sigma_px", cfg.psf_sigma_px);
    cfg.events_per_edge = kv.get_double("emission.events_per_edge", cfg.events_per_edge);
    cfg.jitter_us = kv.get_double("emission.jitter_us", cfg.jitter_us);
    cfg.seed = kv.get_uint("seed", cfg.seed);
    cfg.window_us = kv.get_uint("accumulate.window_us", cfg.window_us);

    const auto led_keys = kv.keys_with_prefix("led.");
    if (led_keys.empty()) {
      cfg.leds = standard_bar();
    }
    for (const auto& key : led_keys) {
      std::istringstream in(kv.raw(key));
      Led led;
      std::string group;
      if (!(in >> led.position.x >> led.position.y >> led.position.z >> led.freq_hz >> group) ||
          (group != "upper" && group != "lower")) {
        throw Error(ErrorKind::Config, kv.source() + ": key '" + key + "' expects 'x y z freq_hz upper|lower'");
      }
      led.group = group == "upper" ? LedGroup::Upper : LedGroup::Lower;
      cfg.leds.push_back(led);
    }
    kv.reject_unused();
    cfg.validate();
    return cfg;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, "scenario: " + what); };
    if (geometry.width == 0 || geometry.height == 0) fail("sensor geometry must be at least 1x1");
    optics.validate();
    if (leds.empty()) fail("at least one LED is required");
    for (const Led& led : leds) {
      if (!(led.freq_hz > 0.0)) fail("LED frequencies must be > 0");
    }
    if (!(trajectory.speed_mps >= 0.0)) fail("trajectory.speed_mps must be >= 0");
    if (!(trajectory.duration_s > 0.0)) fail("trajectory.duration_s must be > 0");
    if (!(psf_sigma_px > 0.0)) fail("psf.sigma_px must be > 0");
    if (!(events_per_edge >= 0.0)) fail("emission.events_per_edge must be >= 0");
    if (!(jitter_us >= 0.0)) fail("emission.jitter_us must be >= 0");
    if (!(noise_rate_eps >= 0.0)) fail("noise.rate_eps must be >= 0");
    if (!(vibration.amplitude_px >= 0.0) || !(vibration.rate_px_per_ms >= 0.0)) fail("vibration values must be >= 0");
    if (window_us == 0) fail("accumulate.window_us must be > 0");
    const double end_distance = trajectory.distance_at(trajectory.duration_s);
    for (const Led& led : leds) {
      if (!(end_distance + led.position.z > 0.0)) fail("trajectory reaches or passes the LED bar");
    }
  }

  std::uint64_t duration_us() const noexcept {
    return static_cast<std::uint64_t>(std::llround(trajectory.duration_s * 1e6));
  }
};

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Pinhole projection of a camera-frame point (x right, y down, z forward)
/// with the principal point at the sensor center.
inline PixelPoint project(const Vec3& cam, const OpticalConfig& optics, SensorGeometry geometry) {
  if (!(cam.z > 0.0)) {
    throw Error(ErrorKind::Projection, "point at z = " + std::to_string(cam.z) + " m is not in front of the camera");
  }
  const double scale = optics.focal_length_m / (cam.z * optics.pixel_pitch_m);
  return {cam.x * scale + geometry.width / 2.0, cam.y * scale + geometry.height / 2.0};
}

/// Camera state at one instant: bar distance and vibration image offset.
struct CameraPose {
  double distance_m = 0.0;
  double vibration_px = 0.0;
};

inline CameraPose pose_at(const ScenarioConfig& cfg, double t_us) {
  return {cfg.trajectory.distance_at(t_us * 1e-6), cfg.vibration.offset_px(t_us)};
}

/// Image position of a bar-local point for a given pose.
inline PixelPoint project_bar_point(const Vec3& bar_point, const CameraPose& pose, const ScenarioConfig& cfg) {
  const Vec3 cam{cfg.trajectory.lateral_m + bar_point.x, -(cfg.trajectory.height_m + bar_point.y),
                 pose.distance_m + bar_point.z};
  PixelPoint p = project(cam, cfg.optics, cfg.geometry);
  p.y += pose.vibration_px;
  return p;
}

/// Mean bar-local position of one LED group; false if the group is empty.
inline bool group_centroid(const std::vector<Led>& leds, LedGroup group, Vec3& out) {
  Vec3 sum;
  std::size_t n = 0;
  for (const Led& led : leds) {
    if (led.group != group) continue;
    sum.x += led.position.x;
    sum.y += led.position.y;
    sum.z += led.position.z;
    ++n;
  }
  if (n == 0) return false;
  out = {sum.x / n, sum.y / n, sum.z / n};
  return true;
}

struct WindowTruth {
  std::uint64_t window_start_us = 0;
  double true_distance_m = 0.0;
  double true_sep_px = 0.0;
  bool in_view = true;
};

struct GroundTruth {
  std::vector<WindowTruth> windows;
};

struct Scenario {
  EventStream stream;
  GroundTruth truth;
};

/// Ground truth at each window's midpoint.
inline GroundTruth ground_truth(const ScenarioConfig& cfg) {
  GroundTruth truth;
  const std::uint64_t duration = cfg.duration_us();
  Vec3 upper, lower;
  const bool have_pair = group_centroid(cfg.leds, LedGroup::Upper, upper) && group_centroid(cfg.leds, LedGroup::Lower, lower);
  for (std::uint64_t start = 0; start < duration; start += cfg.window_us) {
    const double mid = static_cast<double>(start) + cfg.window_us / 2.0;
    const CameraPose pose = pose_at(cfg, mid);
    WindowTruth w;
    w.window_start_us = start;
    w.true_distance_m = pose.distance_m;
    w.true_sep_px = kNaN;
    if (have_pair) {
      const PixelPoint a = project_bar_point(upper, pose, cfg);
      const PixelPoint b = project_bar_point(lower, pose, cfg);
      w.true_sep_px = std::hypot(b.x - a.x, b.y - a.y);
    }
    for (const Led& led : cfg.leds) {
      const PixelPoint p = project_bar_point(led.position, pose, cfg);
      if (p.x < 0.0 || p.y < 0.0 || p.x > cfg.geometry.width - 1.0 || p.y > cfg.geometry.height - 1.0) {
        w.in_view = false;
      }
    }
    truth.windows.push_back(w);
  }
  return truth;
}

namespace detail {

/// Emits the events of one blink edge of a spot centered at `spot`.
struct EdgeScratch {
  std::vector<double> gx, gy, cumulative;
};

inline void emit_edge(const PixelPoint& spot, double edge_t_us, Polarity polarity, const ScenarioConfig& cfg,
                      std::mt19937_64& rng, EdgeScratch& scratch, std::vector<Event>& out) {
  const double sigma = cfg.psf_sigma_px;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  const int cx = static_cast<int>(std::lround(spot.x));
  const int cy = static_cast<int>(std::lround(spot.y));
  const int x0 = std::max(cx - radius, 0), x1 = std::min(cx + radius, cfg.geometry.width - 1);
  const int y0 = std::max(cy - radius, 0), y1 = std::min(cy + radius, cfg.geometry.height - 1);
  if (x0 > x1 || y0 > y1) return;

  const double inv = 1.0 / (2.0 * sigma * sigma);
  const int nx = x1 - x0 + 1, ny = y1 - y0 + 1;
  auto& gx = scratch.gx;
  auto& gy = scratch.gy;
  auto& weights = scratch.cumulative;
  gx.resize(static_cast<std::size_t>(nx));
  gy.resize(static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i) gx[static_cast<std::size_t>(i)] = std::exp(-std::pow(x0 + i - spot.x, 2) * inv);
  for (int j = 0; j < ny; ++j) gy[static_cast<std::size_t>(j)] = std::exp(-std::pow(y0 + j - spot.y, 2) * inv);

  weights.resize(static_cast<std::size_t>(nx * ny));
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      total += gx[static_cast<std::size_t>(i)] * gy[static_cast<std::size_t>(j)];
      weights[static_cast<std::size_t>(j * nx + i)] = total;
    }
  }
  // Independent per-pixel Poisson counts are equivalent to a Poisson total
  // split multinomially by the per-pixel means.
  std::poisson_distribution<std::uint64_t> count_dist(cfg.events_per_edge * total);
  const std::uint64_t n = total > 0.0 ? count_dist(rng) : 0;
  std::uniform_real_distribution<double> pick(0.0, total);
  std::uniform_real_distribution<double> jitter(-cfg.jitter_us, cfg.jitter_us);
  const double last_t = static_cast<double>(cfg.duration_us() - 1);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto it = std::upper_bound(weights.begin(), weights.end(), pick(rng));
    const auto cell = std::min<std::size_t>(static_cast<std::size_t>(it - weights.begin()), weights.size() - 1);
    const double t = std::clamp(edge_t_us + jitter(rng), 0.0, last_t);
    out.push_back({static_cast<std::uint16_t>(x0 + static_cast<int>(cell) % nx),
                   static_cast<std::uint16_t>(y0 + static_cast<int>(cell) / nx), static_cast<std::uint64_t>(t),
                   polarity});
  }
}

}  // namespace detail

/// Generates the event stream and per-window ground truth. Bit-reproducible
/// for a fixed config and seed.
inline Scenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Scenario out;
  out.stream.geometry = cfg.geometry;
  out.truth = ground_truth(cfg);
  auto& events = out.stream.events;

  const double duration = static_cast<double>(cfg.duration_us());
  detail::EdgeScratch scratch;
  for (const Led& led : cfg.leds) {
    const double half_period_us = 1e6 / (2.0 * led.freq_hz);
    for (std::uint64_t k = 0;; ++k) {
      const double t_edge = static_cast<double>(k) * half_period_us;
      if (t_edge >= duration) break;
      const PixelPoint spot = project_bar_point(led.position, pose_at(cfg, t_edge), cfg);
      const Polarity pol = k % 2 == 0 ? Polarity::Positive : Polarity::Negative;
      detail::emit_edge(spot, t_edge, pol, cfg, rng, scratch, events);
    }
  }

  std::poisson_distribution<std::uint64_t> noise_count(cfg.noise_rate_eps * cfg.trajectory.duration_s);
  const std::uint64_t n_noise = cfg.noise_rate_eps > 0.0 ? noise_count(rng) : 0;
  std::uniform_int_distribution<std::uint64_t> noise_t(0, cfg.duration_us() - 1);
  std::uniform_int_distribution<std::uint32_t> noise_x(0, cfg.geometry.width - 1u);
  std::uniform_int_distribution<std::uint32_t> noise_y(0, cfg.geometry.height - 1u);
  std::bernoulli_distribution noise_p(0.5);
  events.reserve(events.size() + n_noise);
  for (std::uint64_t k = 0; k < n_noise; ++k) {
    const auto t = noise_t(rng);
    const auto x = static_cast<std::uint16_t>(noise_x(rng));
    const auto y = static_cast<std::uint16_t>(noise_y(rng));
    events.push_back({x, y, t, noise_p(rng) ? Polarity::Positive : Polarity::Negative});
  }

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.polarity < b.polarity;
  });
  return out;
}

inline constexpr std::string_view kTruthCsvHeader = "window_start_us,true_distance_m,true_sep_px,in_view";

inline void write_truth_csv(const std::filesystem::path& path, const GroundTruth& truth) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << kTruthCsvHeader << '\n';
  for (const WindowTruth& w : truth.windows) {
    out << w.window_start_us << ',' << detail::format_fixed(w.true_distance_m) << ','
        << detail::format_fixed(w.true_sep_px) << ',' << (w.in_view ? 1 : 0) << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace evrange
