#pragma once

// Event recording formats.
//
// CSV: header line `x,y,t_us,p`, then one event per line, p = 1 for positive.
// The CSV carries no geometry, so readers take it from the caller.
//
// BIN (little-endian):
//   header, 24 bytes: magic "EVR1" | width u16 | height u16 | 8 reserved zero bytes | count u64
//   record, 16 bytes: x u16 | y u16 | polarity u8 | 3 zero pad bytes | t u64

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "evrange/error.hpp"
#include "evrange/event.hpp"

namespace evrange {

enum class EventFormat { Csv, Bin };

/// Strict rejects events outside the sensor; lenient counts and skips them.
enum class BoundsPolicy { Strict, Lenient };

inline constexpr std::size_t kBinHeaderSize = 24;
inline constexpr std::size_t kBinRecordSize = 16;
inline constexpr std::array<char, 4> kBinMagic = {'E', 'V', 'R', '1'};
inline constexpr std::string_view kCsvHeader = "x,y,t_us,p";

/// Picks the format from the file extension (`.csv` or anything else = bin).
inline EventFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? EventFormat::Csv : EventFormat::Bin;
}

namespace detail {

template <typename T>
void put_le(unsigned char* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu);
  }
}

template <typename T>
T get_le(const unsigned char* in) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  }
  return static_cast<T>(value);
}

inline void encode_record(const Event& e, unsigned char* out) {
  put_le<std::uint16_t>(out, e.x);
  put_le<std::uint16_t>(out + 2, e.y);
  out[4] = static_cast<unsigned char>(e.polarity);
  out[5] = out[6] = out[7] = 0;
  put_le<std::uint64_t>(out + 8, e.t);
}

template <typename T>
bool parse_field(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

inline std::string io_context(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

}  // namespace detail

/// Streaming reader for either event format. Validates ordering and bounds
/// as it goes.
class EventReader {
 public:
  EventReader(const std::filesystem::path& path, EventFormat format, SensorGeometry declared = {},
              BoundsPolicy policy = BoundsPolicy::Strict)
      : path_(path), format_(format), geometry_(declared), policy_(policy) {
    in_.open(path, std::ios::binary);
    if (!in_) {
      throw Error(ErrorKind::Io, "cannot open " + detail::io_context(path));
    }
    if (format_ == EventFormat::Bin) {
      read_bin_header();
    } else {
      read_csv_header();
    }
    if (geometry_.width == 0 || geometry_.height == 0) {
      throw Error(ErrorKind::Parse, detail::io_context(path) + ": sensor geometry must be at least 1x1");
    }
  }

  const SensorGeometry& geometry() const noexcept { return geometry_; }

  /// Events dropped because they fell outside the sensor (lenient mode only).
  std::size_t skipped() const noexcept { return skipped_; }

  /// Appends up to `max_events` events to `out`. Returns false once the file
  /// is exhausted and nothing was appended.
  bool read_batch(std::vector<Event>& out, std::size_t max_events) {
    const std::size_t before = out.size();
    if (format_ == EventFormat::Bin) {
      read_bin_batch(out, max_events);
    } else {
      read_csv_batch(out, max_events);
    }
    return out.size() > before || !exhausted_;
  }

 private:
  void read_bin_header() {
    std::array<unsigned char, kBinHeaderSize> header{};
    in_.read(reinterpret_cast<char*>(header.data()), header.size());
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0) {
      // An empty file is an empty recording with the declared geometry.
      exhausted_ = true;
      return;
    }
    if (got < kBinHeaderSize) {
      throw Error(ErrorKind::Parse, detail::io_context(path_) + ": truncated header at byte " + std::to_string(got));
    }
    if (std::memcmp(header.data(), kBinMagic.data(), kBinMagic.size()) != 0) {
      throw Error(ErrorKind::Parse, detail::io_context(path_) + ": bad magic at byte 0");
    }
    geometry_.width = detail::get_le<std::uint16_t>(header.data() + 4);
    geometry_.height = detail::get_le<std::uint16_t>(header.data() + 6);
    remaining_ = detail::get_le<std::uint64_t>(header.data() + 16);

    std::error_code ec;
    const auto size = std::filesystem::file_size(path_, ec);
    if (!ec && size != kBinHeaderSize + remaining_ * kBinRecordSize) {
      throw Error(ErrorKind::Parse, detail::io_context(path_) + ": header declares " + std::to_string(remaining_) +
                                        " events but file holds " + std::to_string(size) + " bytes");
    }
    offset_ = kBinHeaderSize;
    exhausted_ = remaining_ == 0;
  }

  void read_bin_batch(std::vector<Event>& out, std::size_t max_events) {
    if (exhausted_) return;
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining_, max_events));
    buffer_.resize(n * kBinRecordSize);
    in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    if (static_cast<std::size_t>(in_.gcount()) != buffer_.size()) {
      throw Error(ErrorKind::Parse, detail::io_context(path_) + ": truncated record at byte " +
                                        std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
    }
    out.reserve(out.size() + n);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned char* rec = buffer_.data() + i * kBinRecordSize;
      const std::uint8_t p = rec[4];
      if (p > 1) {
        throw Error(ErrorKind::Parse, detail::io_context(path_) + ": invalid polarity " + std::to_string(p) +
                                          " at byte " + std::to_string(offset_ + 4));
      }
      Event e{detail::get_le<std::uint16_t>(rec), detail::get_le<std::uint16_t>(rec + 2),
              detail::get_le<std::uint64_t>(rec + 8), static_cast<Polarity>(p)};
      accept(e, out, "byte", offset_);
      offset_ += kBinRecordSize;
    }
    remaining_ -= n;
    exhausted_ = remaining_ == 0;
  }

  void read_csv_header() {
    std::string line;
    if (!std::getline(in_, line)) {
      exhausted_ = true;
      return;
    }
    line_no_ = 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
      throw Error(ErrorKind::Parse, detail::io_context(path_) + ": line 1: expected header '" +
                                        std::string(kCsvHeader) + "'");
    }
  }

  void read_csv_batch(std::vector<Event>& out, std::size_t max_events) {
    std::string line;
    std::size_t appended = 0;
    while (appended < max_events && !exhausted_) {
      if (!std::getline(in_, line)) {
        exhausted_ = true;
        break;
      }
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;

      std::array<std::string_view, 4> fields;
      std::size_t count = 0;
      std::string_view rest = line;
      for (;;) {
        const auto comma = rest.find(',');
        if (count < fields.size()) fields[count] = rest.substr(0, comma);
        ++count;
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      std::uint32_t x = 0, y = 0, p = 0;
      std::uint64_t t = 0;
      if (count != 4 || !detail::parse_field(fields[0], x) || !detail::parse_field(fields[1], y) ||
          !detail::parse_field(fields[2], t) || !detail::parse_field(fields[3], p) || p > 1 || x > 0xFFFF ||
          y > 0xFFFF) {
        throw Error(ErrorKind::Parse,
                    detail::io_context(path_) + ": line " + std::to_string(line_no_) + ": malformed record '" + line + "'");
      }
      const std::size_t before = out.size();
      accept(Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t, static_cast<Polarity>(p)}, out,
             "line", line_no_);
      appended += out.size() - before;
    }
  }

  void accept(const Event& e, std::vector<Event>& out, const char* unit, std::uint64_t position) {
    auto where = [&] { return std::string(unit) + " " + std::to_string(position); };
    if (e.t < last_t_) {
      throw Error(ErrorKind::Ordering, detail::io_context(path_) + ": " + where() + ": timestamp " + std::to_string(e.t) +
                                           " precedes " + std::to_string(last_t_));
    }
    last_t_ = e.t;
    if (!geometry_.contains(e.x, e.y)) {
      if (policy_ == BoundsPolicy::Lenient) {
        ++skipped_;
        return;
      }
      throw Error(ErrorKind::OutOfBounds, detail::io_context(path_) + ": " + where() + ": event (" + std::to_string(e.x) +
                                              "," + std::to_string(e.y) + ") outside " +
                                              std::to_string(geometry_.width) + "x" + std::to_string(geometry_.height));
    }
    out.push_back(e);
  }

  std::filesystem::path path_;
  EventFormat format_;
  SensorGeometry geometry_;
  BoundsPolicy policy_;
  std::ifstream in_;
  std::vector<unsigned char> buffer_;
  std::uint64_t remaining_ = 0;
  std::uint64_t offset_ = 0;
  std::size_t line_no_ = 0;
  std::uint64_t last_t_ = 0;
  std::size_t skipped_ = 0;
  bool exhausted_ = false;
};

/// Reads a whole recording. `declared` is the geometry for CSV input and for
/// empty bin files; non-empty bin files carry their own.
inline EventStream read_events(const std::filesystem::path& path, EventFormat format, SensorGeometry declared = {},
                               BoundsPolicy policy = BoundsPolicy::Strict, std::size_t* skipped = nullptr) {
  EventReader reader(path, format, declared, policy);
  EventStream stream{reader.geometry(), {}};
  while (reader.read_batch(stream.events, 1 << 20)) {
  }
  if (skipped != nullptr) *skipped = reader.skipped();
  return stream;
}

inline void write_events(const EventStream& stream, const std::filesystem::path& path, EventFormat format) {
  validate(stream);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open " + detail::io_context(path) + " for writing");
  }

  if (format == EventFormat::Bin) {
    std::array<unsigned char, kBinHeaderSize> header{};
    std::memcpy(header.data(), kBinMagic.data(), kBinMagic.size());
    detail::put_le<std::uint16_t>(header.data() + 4, stream.geometry.width);
    detail::put_le<std::uint16_t>(header.data() + 6, stream.geometry.height);
    detail::put_le<std::uint64_t>(header.data() + 16, stream.events.size());
    out.write(reinterpret_cast<const char*>(header.data()), header.size());

    constexpr std::size_t kChunk = 1 << 16;
    std::vector<unsigned char> buffer(kChunk * kBinRecordSize);
    for (std::size_t begin = 0; begin < stream.events.size(); begin += kChunk) {
      const std::size_t n = std::min(kChunk, stream.events.size() - begin);
      for (std::size_t i = 0; i < n; ++i) {
        detail::encode_record(stream.events[begin + i], buffer.data() + i * kBinRecordSize);
      }
      out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(n * kBinRecordSize));
    }
  } else {
    std::string text;
    text.reserve(64 + stream.events.size() * 20);
    text.append(kCsvHeader).push_back('\n');
    std::array<char, 24> num{};
    auto append = [&](auto value, char sep) {
      auto [ptr, ec] = std::to_chars(num.data(), num.data() + num.size(), value);
      text.append(num.data(), ptr);
      text.push_back(sep);
    };
    for (const Event& e : stream.events) {
      append(e.x, ',');
      append(e.y, ',');
      append(e.t, ',');
      append(static_cast<unsigned>(e.polarity), '\n');
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  }

  out.flush();
  if (!out) {
    throw Error(ErrorKind::Io, "write failed for " + detail::io_context(path));
  }
}

}  // namespace evrange
