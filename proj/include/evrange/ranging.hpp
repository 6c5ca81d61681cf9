#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "evrange/accumulation.hpp"
#include "evrange/config.hpp"
#include "evrange/error.hpp"
#include "evrange/event.hpp"
#include "evrange/filtering.hpp"
#include "evrange/poc.hpp"
#include "evrange/separation.hpp"

namespace evrange {

/// Constants of the triangulation model. `baseline_m` is the physical
/// distance between the centroids of the upper and lower LED groups.
struct OpticalConfig {
  double focal_length_m = 0.0;
  double pixel_pitch_m = 0.0;
  double baseline_m = 0.0;

  void validate() const {
    if (!(focal_length_m > 0.0)) throw Error(ErrorKind::Config, "optics.focal_length_m must be > 0");
    if (!(pixel_pitch_m > 0.0)) throw Error(ErrorKind::Config, "optics.pixel_pitch_m must be > 0");
    if (!(baseline_m > 0.0)) throw Error(ErrorKind::Config, "optics.baseline_m must be > 0");
  }
};

/// Distance L = f S / (W alpha) for a pixel separation W.
inline double triangulate(double w_px, const OpticalConfig& optics) {
  if (!(w_px > 0.0)) {
    throw Error(ErrorKind::Domain, "pixel separation must be > 0, got " + std::to_string(w_px));
  }
  return optics.focal_length_m * optics.baseline_m / (w_px * optics.pixel_pitch_m);
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RangeEstimate {
  std::uint64_t window_start_us = 0;
  double w_px = kNaN;
  double distance_m = kNaN;
  double peak_value = kNaN;
  bool valid = false;
  /// Empty when valid, otherwise the failing stage's error kind.
  std::string reason;
};

struct PipelineConfig {
  SensorGeometry sensor;
  HighPassConfig highpass;
  CountThresholdConfig threshold;
  AccumulateConfig accumulate;
  std::uint32_t roi_margin_px = 4;
  /// Reject windows whose weighted row lands on counts instead of the gap
  /// between the groups (e.g. only one group visible).
  bool require_gap = true;
  PocConfig poc;
  OpticalConfig optics;
  unsigned threads = 1;

  /// Reads every pipeline key; optics keys are required. Unknown keys are
  /// rejected so typos do not silently fall back to defaults.
  static PipelineConfig from(const KeyValueConfig& kv) {
    PipelineConfig cfg;
    cfg.sensor.width = narrow16(kv, "sensor.width", cfg.sensor.width);
    cfg.sensor.height = narrow16(kv, "sensor.height", cfg.sensor.height);
    cfg.highpass.cutoff_period_us = kv.get_uint("filter.highpass_cutoff_us", cfg.highpass.cutoff_period_us);
    cfg.threshold.min_count = static_cast<std::uint32_t>(kv.get_uint("filter.min_count", cfg.threshold.min_count));
    cfg.accumulate.window_us = kv.get_uint("accumulate.window_us", cfg.accumulate.window_us);
    const std::string pol = kv.get_string("accumulate.polarity", "both");
    if (pol == "both") {
      cfg.accumulate.polarity = PolarityMode::Both;
    } else if (pol == "pos") {
      cfg.accumulate.polarity = PolarityMode::Positive;
    } else if (pol == "neg") {
      cfg.accumulate.polarity = PolarityMode::Negative;
    } else {
      throw Error(ErrorKind::Config, kv.source() + ": accumulate.polarity must be both|pos|neg, got '" + pol + "'");
    }
    cfg.roi_margin_px = static_cast<std::uint32_t>(kv.get_uint("accumulate.roi_margin_px", cfg.roi_margin_px));
    cfg.require_gap = kv.get_bool("separation.require_gap", cfg.require_gap);
    cfg.poc.min_peak = kv.get_double("poc.min_peak", cfg.poc.min_peak);
    cfg.poc.pad_pow2 = kv.get_bool("poc.pad_pow2", cfg.poc.pad_pow2);
    cfg.poc.pad_linear = kv.get_bool("poc.pad_linear", cfg.poc.pad_linear);
    cfg.poc.clamp_negative = kv.get_bool("poc.clamp_negative", cfg.poc.clamp_negative);
    cfg.optics.focal_length_m = kv.get_double("optics.focal_length_m");
    cfg.optics.pixel_pitch_m = kv.get_double("optics.pixel_pitch_m");
    cfg.optics.baseline_m = kv.get_double("optics.baseline_m");
    cfg.threads = static_cast<unsigned>(kv.get_uint("pipeline.threads", cfg.threads));
    kv.reject_unused();
    cfg.validate();
    return cfg;
  }

  void validate() const {
    if (sensor.width == 0 || sensor.height == 0) throw Error(ErrorKind::Config, "sensor geometry must be at least 1x1");
    if (highpass.cutoff_period_us == 0) throw Error(ErrorKind::Config, "filter.highpass_cutoff_us must be > 0");
    if (accumulate.window_us == 0) throw Error(ErrorKind::Config, "accumulate.window_us must be > 0");
    if (threads == 0) throw Error(ErrorKind::Config, "pipeline.threads must be >= 1");
    optics.validate();
  }

 private:
  static std::uint16_t narrow16(const KeyValueConfig& kv, const std::string& key, std::uint16_t fallback) {
    const auto v = kv.get_uint(key, fallback);
    if (v == 0 || v > 0xFFFF) throw Error(ErrorKind::Config, kv.source() + ": " + key + " must be in [1, 65535]");
    return static_cast<std::uint16_t>(v);
  }
};

/// Separation, correlation and triangulation for one cropped window.
inline RangeEstimate estimate_roi(const CountFrame& roi, const PipelineConfig& cfg) {
  RangeEstimate est;
  est.window_start_us = roi.window_start_us;
  try {
    const SplitFrames groups = split(roi);
    if (cfg.require_gap && !boundary_in_gap(roi, groups.boundary_y)) {
      est.reason = std::string(to_string(ErrorKind::SeparationFailure));
      return est;
    }
    const PocResult poc = correlate(groups.upper, groups.lower, cfg.poc);
    est.w_px = poc.w_px;
    est.peak_value = poc.peak_value;
    if (!(poc.peak_value >= cfg.poc.min_peak)) {
      est.reason = std::string(to_string(ErrorKind::LowConfidence));
      return est;
    }
    est.distance_m = triangulate(poc.w_px, cfg.optics);
    est.valid = true;
  } catch (const Error& e) {
    est.reason = std::string(to_string(e.kind()));
  }
  return est;
}

/// Thresholding onward for one full-sensor window.
inline RangeEstimate estimate_window(const CountFrame& frame, const PipelineConfig& cfg) {
  try {
    return estimate_roi(crop_to_roi(count_threshold(frame, cfg.threshold), cfg.roi_margin_px), cfg);
  } catch (const Error& e) {
    RangeEstimate est;
    est.window_start_us = frame.window_start_us;
    est.reason = std::string(to_string(e.kind()));
    return est;
  }
}

/// Streaming end-to-end estimator: high-pass, accumulate, threshold, crop,
/// split, correlate, triangulate. One estimate per window, in window order;
/// stage failures become invalid estimates rather than gaps.
class RangeEstimator {
 public:
  explicit RangeEstimator(PipelineConfig cfg)
      : cfg_(std::move(cfg)), highpass_(cfg_.sensor, cfg_.highpass), accumulator_(cfg_.sensor, cfg_.accumulate) {
    cfg_.validate();
  }

  /// Consumes a time-ordered batch. Window boundaries follow the raw
  /// timestamps, so windows emptied by filtering still appear.
  void push(std::span<const Event> events) {
    auto sink = [this](const CountFrame& f) { on_frame(f); };
    for (const Event& e : events) {
      if (highpass_.accept(e)) {
        accumulator_.add(e, sink);
      } else {
        accumulator_.advance_to(e.t, sink);
      }
    }
  }

  /// Flushes the last window and returns all estimates produced so far.
  std::vector<RangeEstimate> finish() {
    accumulator_.finish([this](const CountFrame& f) { on_frame(f); });
    drain();
    return std::move(estimates_);
  }

 private:
  struct Pending {
    std::uint64_t window_start_us = 0;
    CountFrame roi;
    std::string early_failure;
  };

  static constexpr std::size_t kBatch = 256;

  void on_frame(const CountFrame& frame) {
    Pending p;
    p.window_start_us = frame.window_start_us;
    try {
      p.roi = crop_to_roi(count_threshold(frame, cfg_.threshold), cfg_.roi_margin_px);
    } catch (const Error& e) {
      p.early_failure = std::string(to_string(e.kind()));
    }
    pending_.push_back(std::move(p));
    if (pending_.size() >= kBatch) drain();
  }

  void drain() {
    const std::size_t base = estimates_.size();
    estimates_.resize(base + pending_.size());
    auto work = [&](std::size_t begin, std::size_t step) {
      for (std::size_t i = begin; i < pending_.size(); i += step) {
        const Pending& p = pending_[i];
        RangeEstimate& out = estimates_[base + i];
        if (!p.early_failure.empty()) {
          out.window_start_us = p.window_start_us;
          out.reason = p.early_failure;
        } else {
          out = estimate_roi(p.roi, cfg_);
        }
      }
    };
    const std::size_t n_threads = std::min<std::size_t>(cfg_.threads, pending_.size());
    if (n_threads <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
    }
    pending_.clear();
  }

  PipelineConfig cfg_;
  HighPassFilter highpass_;
  FrameAccumulator accumulator_;
  std::vector<Pending> pending_;
  std::vector<RangeEstimate> estimates_;
};

inline std::vector<RangeEstimate> estimate_stream(const EventStream& stream, const PipelineConfig& cfg) {
  PipelineConfig run = cfg;
  run.sensor = stream.geometry;
  RangeEstimator estimator(run);
  estimator.push(stream.events);
  return estimator.finish();
}

inline constexpr std::string_view kEstimateCsvHeader = "window_start_us,W_px,distance_m,peak,valid,reason";

namespace detail {
inline std::string format_fixed(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}
}  // namespace detail

inline void write_estimates_csv(std::ostream& out, std::span<const RangeEstimate> estimates) {
  out << kEstimateCsvHeader << '\n';
  for (const RangeEstimate& e : estimates) {
    out << e.window_start_us << ',' << detail::format_fixed(e.w_px) << ',' << detail::format_fixed(e.distance_m) << ','
        << detail::format_fixed(e.peak_value) << ',' << (e.valid ? 1 : 0) << ',' << e.reason << '\n';
  }
}

inline void write_estimates_csv(const std::filesystem::path& path, std::span<const RangeEstimate> estimates) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_estimates_csv(out, estimates);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace evrange
