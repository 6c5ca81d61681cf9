#pragma once

// Flat `key = value` config files. `#` starts a comment; blank lines are
// ignored; keys are unique.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "evrange/error.hpp"

namespace evrange {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string source = "<config>") {
    KeyValueConfig cfg;
    cfg.source_ = std::move(source);
    std::size_t line_no = 0;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string_view key = eq == std::string_view::npos ? std::string_view{} : trim(line.substr(0, eq));
      if (key.empty()) {
        throw Error(ErrorKind::Config, cfg.source_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string_view value = trim(line.substr(eq + 1));
      if (!cfg.values_.emplace(std::string(key), std::string(value)).second) {
        throw Error(ErrorKind::Config,
                    cfg.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
      }
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  const std::string& raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw Error(ErrorKind::Config, source_ + ": missing config key '" + key + "'");
    }
    used_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
  }

  double get_double(const std::string& key) const { return parse_number<double>(key, raw(key)); }
  double get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

  std::uint64_t get_uint(const std::string& key) const { return parse_number<std::uint64_t>(key, raw(key)); }
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_uint(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(ErrorKind::Config, source_ + ": key '" + key + "' expects true/false, got '" + v + "'");
  }

  /// Keys beginning with `prefix`, in lexical order.
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (std::string_view(k).substr(0, prefix.size()) == prefix) out.push_back(k);
    }
    return out;
  }

  /// Throws on the first key no getter has read.
  void reject_unused() const {
    for (const auto& [k, v] : values_) {
      if (used_.count(k) == 0) throw Error(ErrorKind::Config, source_ + ": unknown config key '" + k + "'");
    }
  }

  const std::string& source() const noexcept { return source_; }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  }

  template <typename T>
  T parse_number(const std::string& key, const std::string& text) const {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
      throw Error(ErrorKind::Config, source_ + ": key '" + key + "' has invalid numeric value '" + text + "'");
    }
    return value;
  }

  std::map<std::string, std::string> values_;
  std::string source_ = "<config>";
  mutable std::set<std::string> used_;
};

}  // namespace evrange
