#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_asr/chat.hpp"

namespace gesture_asr::stats {

/// Per-label summary, one row of the data-statistics table.
///
/// Durations are kept as exact millisecond integers; the rounded seconds shown
/// in rendered output are derived from them (half-to-even at 2 decimals).
struct GestureStatsRow {
  std::string label;                   // canonical label name, raw text for Other, "total"
  std::size_t utterance_count = 0;     // utterances with >= 1 event of the label
  std::size_t user_count = 0;          // distinct (file, speaker) pairs
  std::size_t event_count = 0;
  std::size_t events_without_span = 0;  // counted, but excluded from durations
  std::int64_t duration_total_ms = 0;
  std::optional<std::int64_t> duration_min_ms;
  std::optional<std::int64_t> duration_max_ms;

  std::size_t timed_events() const noexcept { return event_count - events_without_span; }
  std::optional<double> mean_s() const;
  std::optional<double> min_s() const;
  std::optional<double> max_s() const;

  friend bool operator==(const GestureStatsRow&, const GestureStatsRow&) = default;
};

struct StatsReport {
  std::vector<GestureStatsRow> rows;  // six canonical labels first, then Other labels by name
  GestureStatsRow total;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

/// Parallel over files with a deterministic merge.
StatsReport compute_stats(const chat::Corpus& corpus);

/// Single-threaded reference kept for testing and benchmarking.
StatsReport compute_stats_serial(const chat::Corpus& corpus);

enum class Format { table, csv, json };

/// Throws UnknownFormat.
Format format_from_string(std::string_view name);

std::string render_stats(const StatsReport& report, Format format);

/// Inverse of the json rendering.
StatsReport stats_from_json(std::string_view json_text);

/// Rounds `numerator / denominator` milliseconds to centiseconds, ties to even.
std::int64_t round_ms_ratio_to_centis(std::int64_t numerator_ms, std::int64_t denominator);

/// "3.76" style rendering of a centisecond count.
std::string format_centis(std::int64_t centis);

}  // namespace gesture_asr::stats
