#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evrange/error.hpp"
#include "evrange/ranging.hpp"
#include "evrange/synthgen.hpp"

namespace evrange {

enum class WindowPresence { Both, EstimateOnly, TruthOnly };

struct WindowError {
  std::uint64_t window_start_us = 0;
  WindowPresence presence = WindowPresence::Both;
  double true_distance_m = kNaN;
  double estimated_m = kNaN;
  double abs_error_m = kNaN;
  bool valid = false;
  bool in_view = false;
  bool within = false;
  std::string reason;
};

/// Accuracy of range estimates against ground truth. Rates are taken over
/// in-view windows present in both inputs.
struct ErrorReport {
  double threshold_m = 0.5;
  std::vector<WindowError> windows;

  std::size_t in_view_windows = 0;
  std::size_t valid_windows = 0;
  std::size_t within_threshold = 0;
  std::size_t estimate_only = 0;
  std::size_t truth_only = 0;

  /// Within-threshold windows over all in-view windows (invalid ones count
  /// as misses).
  double fraction_within = 0.0;
  /// Within-threshold windows over valid in-view windows.
  double fraction_within_valid = 0.0;

  double mean_error_m = kNaN;
  double median_error_m = kNaN;
  double max_error_m = kNaN;

  std::map<std::string, std::size_t> invalid_by_reason;
};

/// Joins on exact window_start_us. Windows found in only one input are kept
/// in the table and counted, never silently dropped. Throws DegenerateInput
/// when the inputs share no window.
inline ErrorReport evaluate(std::span<const RangeEstimate> estimates, std::span<const WindowTruth> truth,
                            double threshold_m = 0.5) {
  if (!(threshold_m >= 0.0)) throw Error(ErrorKind::Config, "threshold must be >= 0");
  std::map<std::uint64_t, const RangeEstimate*> by_window;
  for (const RangeEstimate& e : estimates) by_window.emplace(e.window_start_us, &e);

  ErrorReport report;
  report.threshold_m = threshold_m;
  std::vector<double> errors;
  std::size_t overlap = 0;
  std::map<std::uint64_t, WindowError> rows;

  for (const WindowTruth& t : truth) {
    WindowError row;
    row.window_start_us = t.window_start_us;
    row.true_distance_m = t.true_distance_m;
    row.in_view = t.in_view;
    const auto it = by_window.find(t.window_start_us);
    if (it == by_window.end()) {
      row.presence = WindowPresence::TruthOnly;
      ++report.truth_only;
      rows.emplace(row.window_start_us, row);
      continue;
    }
    ++overlap;
    const RangeEstimate& e = *it->second;
    by_window.erase(it);
    row.estimated_m = e.distance_m;
    row.valid = e.valid;
    row.reason = e.reason;
    if (e.valid) row.abs_error_m = std::abs(e.distance_m - t.true_distance_m);
    row.within = e.valid && row.abs_error_m <= threshold_m;
    if (t.in_view) {
      ++report.in_view_windows;
      if (e.valid) {
        ++report.valid_windows;
        errors.push_back(row.abs_error_m);
        if (row.within) ++report.within_threshold;
      } else {
        ++report.invalid_by_reason[e.reason.empty() ? "unknown" : e.reason];
      }
    }
    rows.emplace(row.window_start_us, row);
  }
  for (const auto& [start, e] : by_window) {
    WindowError row;
    row.window_start_us = start;
    row.presence = WindowPresence::EstimateOnly;
    row.estimated_m = e->distance_m;
    row.valid = e->valid;
    row.reason = e->reason;
    ++report.estimate_only;
    rows.emplace(start, row);
  }
  if (overlap == 0) {
    throw Error(ErrorKind::DegenerateInput, "estimates and ground truth share no window");
  }

  report.windows.reserve(rows.size());
  for (auto& [start, row] : rows) report.windows.push_back(std::move(row));

  if (report.in_view_windows > 0) {
    report.fraction_within = static_cast<double>(report.within_threshold) / report.in_view_windows;
  }
  if (!errors.empty()) {
    report.fraction_within_valid = static_cast<double>(report.within_threshold) / errors.size();
    double sum = 0.0;
    for (double e : errors) sum += e;
    report.mean_error_m = sum / errors.size();
    report.max_error_m = *std::max_element(errors.begin(), errors.end());
    std::sort(errors.begin(), errors.end());
    const std::size_t mid = errors.size() / 2;
    report.median_error_m = errors.size() % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  }
  return report;
}

namespace detail {

/// Splits one CSV line on commas.
inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

template <typename Row>
std::vector<Row> read_csv_rows(const std::filesystem::path& path, std::string_view header, std::size_t columns,
                               Row (*convert)(const std::vector<std::string_view>&, bool&)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "'" + path.string() + "': empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw Error(ErrorKind::Parse, "'" + path.string() + "': line 1: expected header '" + std::string(header) + "'");
  }
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    bool ok = fields.size() == columns;
    Row row{};
    if (ok) row = convert(fields, ok);
    if (!ok) {
      throw Error(ErrorKind::Parse, "'" + path.string() + "': line " + std::to_string(line_no) + ": malformed row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
bool parse_value(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_flag(std::string_view s, bool& out) {
  if (s == "1") out = true;
  else if (s == "0") out = false;
  else return false;
  return true;
}

}  // namespace detail

inline std::vector<RangeEstimate> read_estimates_csv(const std::filesystem::path& path) {
  return detail::read_csv_rows<RangeEstimate>(
      path, kEstimateCsvHeader, 6, [](const std::vector<std::string_view>& f, bool& ok) {
        RangeEstimate e;
        ok = detail::parse_value(f[0], e.window_start_us) && detail::parse_value(f[1], e.w_px) &&
             detail::parse_value(f[2], e.distance_m) && detail::parse_value(f[3], e.peak_value) &&
             detail::parse_flag(f[4], e.valid);
        e.reason = std::string(f[5]);
        return e;
      });
}

inline std::vector<WindowTruth> read_truth_csv(const std::filesystem::path& path) {
  return detail::read_csv_rows<WindowTruth>(
      path, kTruthCsvHeader, 4, [](const std::vector<std::string_view>& f, bool& ok) {
        WindowTruth t;
        ok = detail::parse_value(f[0], t.window_start_us) && detail::parse_value(f[1], t.true_distance_m) &&
             detail::parse_value(f[2], t.true_sep_px) && detail::parse_flag(f[3], t.in_view);
        return t;
      });
}

inline constexpr std::string_view kReportCsvHeader =
    "window_start_us,presence,true_distance_m,estimated_m,abs_error_m,valid,in_view,within,reason";

inline std::string_view to_string(WindowPresence p) {
  switch (p) {
    case WindowPresence::Both: return "both";
    case WindowPresence::EstimateOnly: return "estimate_only";
    case WindowPresence::TruthOnly: return "truth_only";
  }
  return "both";
}

/// Per-window error table.
inline void write_report_csv(std::ostream& out, const ErrorReport& report) {
  out << kReportCsvHeader << '\n';
  for (const WindowError& w : report.windows) {
    out << w.window_start_us << ',' << to_string(w.presence) << ',' << detail::format_fixed(w.true_distance_m) << ','
        << detail::format_fixed(w.estimated_m) << ',' << detail::format_fixed(w.abs_error_m) << ',' << (w.valid ? 1 : 0)
        << ',' << (w.in_view ? 1 : 0) << ',' << (w.within ? 1 : 0) << ',' << w.reason << '\n';
  }
}

inline void write_report_csv(const std::filesystem::path& path, const ErrorReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_report_csv(out, report);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

inline void print_summary(std::ostream& out, const ErrorReport& report) {
  const auto line = [&out](const std::string& label, const auto& value) {
    out << label << ':' << std::string(label.size() < 26 ? 26 - label.size() : 1, ' ') << value << '\n';
  };
  line("in-view windows", report.in_view_windows);
  line("valid windows", report.valid_windows);
  line("within " + detail::format_fixed(report.threshold_m, 3) + " m", report.within_threshold);
  line("fraction within", detail::format_fixed(report.fraction_within, 4));
  line("fraction within (valid)", detail::format_fixed(report.fraction_within_valid, 4));
  line("mean error m", detail::format_fixed(report.mean_error_m, 4));
  line("median error m", detail::format_fixed(report.median_error_m, 4));
  line("max error m", detail::format_fixed(report.max_error_m, 4));
  if (report.estimate_only || report.truth_only) {
    line("unmatched windows", std::to_string(report.estimate_only) + " estimate-only, " +
                                  std::to_string(report.truth_only) + " truth-only");
  }
  for (const auto& [reason, n] : report.invalid_by_reason) line("invalid (" + reason + ")", n);
}

}  // namespace evrange
