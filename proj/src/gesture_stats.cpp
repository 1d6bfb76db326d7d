#include "gesture_asr/gesture_stats.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include <fmt/format.h>
#include "json.hpp"

#include "gesture_asr/errors.hpp"

namespace gesture_asr::stats {

namespace {

using nlohmann::json;

// Mergeable accumulator for one label inside one file.
struct Partial {
  std::size_t utterances = 0;
  std::set<std::string> speakers;
  std::size_t events = 0;
  std::size_t untimed = 0;
  std::int64_t total_ms = 0;
  std::optional<std::int64_t> min_ms;
  std::optional<std::int64_t> max_ms;

  void add_duration(std::int64_t ms) {
    total_ms += ms;
    min_ms = min_ms ? std::min(*min_ms, ms) : ms;
    max_ms = max_ms ? std::max(*max_ms, ms) : ms;
  }
};

struct FilePartial {
  std::map<GestureLabel, Partial> by_label;
  std::set<std::string> gesturing_speakers;
};

FilePartial accumulate_file(const chat::TranscriptFile& file) {
  FilePartial out;
  for (const auto& utt : file.utterances) {
    std::set<GestureLabel> seen;
    for (const auto& token : utt.tokens) {
      const auto* gesture = std::get_if<chat::GestureAnnotation>(&token);
      if (gesture == nullptr) continue;
      auto& p = out.by_label[gesture->label];
      ++p.events;
      const auto span = gesture->span ? gesture->span : utt.span;
      if (span) {
        p.add_duration(span->duration_ms());
      } else {
        ++p.untimed;
      }
      if (seen.insert(gesture->label).second) {
        ++p.utterances;
        p.speakers.insert(utt.speaker);
      }
    }
    if (!seen.empty()) out.gesturing_speakers.insert(utt.speaker);
  }
  return out;
}

void merge_into(GestureStatsRow& row, const Partial& p) {
  row.utterance_count += p.utterances;
  row.user_count += p.speakers.size();  // user identity includes the file
  row.event_count += p.events;
  row.events_without_span += p.untimed;
  row.duration_total_ms += p.total_ms;
  if (p.min_ms) row.duration_min_ms = row.duration_min_ms ? std::min(*row.duration_min_ms, *p.min_ms) : *p.min_ms;
  if (p.max_ms) row.duration_max_ms = row.duration_max_ms ? std::max(*row.duration_max_ms, *p.max_ms) : *p.max_ms;
}

StatsReport merge(const std::vector<FilePartial>& partials) {
  std::map<GestureLabel, GestureStatsRow> rows;
  StatsReport report;
  report.total.label = "total";
  for (const auto& fp : partials) {
    for (const auto& [label, p] : fp.by_label) {
      auto& row = rows[label];
      row.label = label.name();
      merge_into(row, p);
    }
    report.total.user_count += fp.gesturing_speakers.size();
  }
  for (auto& [label, row] : rows) {
    report.total.utterance_count += row.utterance_count;
    report.total.event_count += row.event_count;
    report.total.events_without_span += row.events_without_span;
    report.total.duration_total_ms += row.duration_total_ms;
    auto& t = report.total;
    if (row.duration_min_ms) t.duration_min_ms = t.duration_min_ms ? std::min(*t.duration_min_ms, *row.duration_min_ms) : *row.duration_min_ms;
    if (row.duration_max_ms) t.duration_max_ms = t.duration_max_ms ? std::max(*t.duration_max_ms, *row.duration_max_ms) : *row.duration_max_ms;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::optional<double> ms_to_s(const std::optional<std::int64_t>& ms) {
  if (!ms) return std::nullopt;
  return static_cast<double>(*ms) / 1000.0;
}

std::string rounded(const std::optional<std::int64_t>& ms) {
  return ms ? format_centis(round_ms_ratio_to_centis(*ms, 1)) : std::string();
}

std::string rounded_mean(const GestureStatsRow& row) {
  if (row.timed_events() == 0) return {};
  return format_centis(
      round_ms_ratio_to_centis(row.duration_total_ms, static_cast<std::int64_t>(row.timed_events())));
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

json row_to_json(const GestureStatsRow& row) {
  return json{{"label", row.label},
              {"utterance_count", row.utterance_count},
              {"user_count", row.user_count},
              {"event_count", row.event_count},
              {"events_without_span", row.events_without_span},
              {"duration_total_ms", row.duration_total_ms},
              {"duration_min_ms", optional_json(row.duration_min_ms)},
              {"duration_max_ms", optional_json(row.duration_max_ms)},
              {"duration_mean_s", optional_json(row.mean_s())},
              {"duration_min_s", optional_json(row.min_s())},
              {"duration_max_s", optional_json(row.max_s())}};
}

GestureStatsRow row_from_json(const json& j) {
  GestureStatsRow row;
  row.label = j.at("label").get<std::string>();
  row.utterance_count = j.at("utterance_count").get<std::size_t>();
  row.user_count = j.at("user_count").get<std::size_t>();
  row.event_count = j.at("event_count").get<std::size_t>();
  row.events_without_span = j.at("events_without_span").get<std::size_t>();
  row.duration_total_ms = j.at("duration_total_ms").get<std::int64_t>();
  if (!j.at("duration_min_ms").is_null()) row.duration_min_ms = j.at("duration_min_ms").get<std::int64_t>();
  if (!j.at("duration_max_ms").is_null()) row.duration_max_ms = j.at("duration_max_ms").get<std::int64_t>();
  return row;
}

}  // namespace

std::optional<double> GestureStatsRow::mean_s() const {
  if (timed_events() == 0) return std::nullopt;
  return static_cast<double>(duration_total_ms) / static_cast<double>(timed_events()) / 1000.0;
}
std::optional<double> GestureStatsRow::min_s() const { return ms_to_s(duration_min_ms); }
std::optional<double> GestureStatsRow::max_s() const { return ms_to_s(duration_max_ms); }

std::int64_t round_ms_ratio_to_centis(std::int64_t numerator_ms, std::int64_t denominator) {
  // centis = numerator / (10 * denominator), exact integer rounding.
  const std::int64_t d = 10 * denominator;
  std::int64_t q = numerator_ms / d;
  const std::int64_t r = numerator_ms % d;
  if (2 * r > d || (2 * r == d && (q % 2) != 0)) ++q;
  return q;
}

std::string format_centis(std::int64_t centis) {
  return fmt::format("{}.{:02d}", centis / 100, centis % 100);
}

StatsReport compute_stats(const chat::Corpus& corpus) {
  const auto n = static_cast<std::ptrdiff_t>(corpus.files.size());
  std::vector<FilePartial> partials(corpus.files.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    partials[static_cast<std::size_t>(i)] = accumulate_file(corpus.files[static_cast<std::size_t>(i)]);
  }
  return merge(partials);
}

StatsReport compute_stats_serial(const chat::Corpus& corpus) {
  // Flat event list, aggregated directly without per-file partials.
  struct Event {
    GestureLabel label;
    std::string file;
    std::string speaker;
    std::size_t utterance;
    std::optional<std::int64_t> ms;
  };
  std::vector<Event> events;
  for (const auto& file : corpus.files) {
    for (const auto& e : chat::extract_gesture_events(file)) {
      const auto& utt = file.utterances[*e.utterance_index];
      events.push_back({e.label, file.path, utt.speaker, utt.index,
                        e.span ? std::optional<std::int64_t>(e.span->duration_ms()) : std::nullopt});
    }
  }

  std::set<GestureLabel> labels;
  for (const auto& e : events) labels.insert(e.label);

  StatsReport report;
  report.total.label = "total";
  std::set<std::pair<std::string, std::string>> all_users;
  for (const auto& label : labels) {
    GestureStatsRow row;
    row.label = label.name();
    std::set<std::pair<std::string, std::size_t>> utts;
    std::set<std::pair<std::string, std::string>> users;
    for (const auto& e : events) {
      if (e.label != label) continue;
      ++row.event_count;
      utts.insert({e.file, e.utterance});
      users.insert({e.file, e.speaker});
      all_users.insert({e.file, e.speaker});
      if (!e.ms) {
        ++row.events_without_span;
        continue;
      }
      row.duration_total_ms += *e.ms;
      row.duration_min_ms = row.duration_min_ms ? std::min(*row.duration_min_ms, *e.ms) : *e.ms;
      row.duration_max_ms = row.duration_max_ms ? std::max(*row.duration_max_ms, *e.ms) : *e.ms;
    }
    row.utterance_count = utts.size();
    row.user_count = users.size();
    report.rows.push_back(row);
  }

  auto& t = report.total;
  t.user_count = all_users.size();
  for (const auto& row : report.rows) t.utterance_count += row.utterance_count;
  for (const auto& e : events) {
    ++t.event_count;
    if (!e.ms) {
      ++t.events_without_span;
      continue;
    }
    t.duration_total_ms += *e.ms;
    t.duration_min_ms = t.duration_min_ms ? std::min(*t.duration_min_ms, *e.ms) : *e.ms;
    t.duration_max_ms = t.duration_max_ms ? std::max(*t.duration_max_ms, *e.ms) : *e.ms;
  }
  return report;
}

Format format_from_string(std::string_view name) {
  if (name == "table") return Format::table;
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw UnknownFormat(std::string(name));
}

std::string render_stats(const StatsReport& report, Format format) {
  switch (format) {
    case Format::csv: {
      std::string out = "label,# utt,# user,mean,min,max\n";
      auto line = [&](const GestureStatsRow& row) {
        out += fmt::format("{},{},{},{},{},{}\n", row.label, row.utterance_count, row.user_count,
                           rounded_mean(row), rounded(row.duration_min_ms), rounded(row.duration_max_ms));
      };
      for (const auto& row : report.rows) line(row);
      line(report.total);
      return out;
    }
    case Format::table: {
      auto dash = [](std::string s) { return s.empty() ? std::string("-") : s; };
      std::string out = fmt::format("{:<22} {:>6} {:>7} {:>7} {:>7} {:>7}\n", "label", "# utt", "# user",
                                    "mean", "min", "max");
      out += std::string(61, '-') + "\n";
      for (const auto& row : report.rows) {
        out += fmt::format("{:<22} {:>6} {:>7} {:>7} {:>7} {:>7}\n", "[gesture:" + row.label + "]",
                           row.utterance_count, row.user_count, dash(rounded_mean(row)),
                           dash(rounded(row.duration_min_ms)), dash(rounded(row.duration_max_ms)));
      }
      out += std::string(61, '-') + "\n";
      const auto& t = report.total;
      out += fmt::format("{:<22} {:>6} {:>7} {:>7} {:>7} {:>7}\n", "total", t.utterance_count, t.user_count,
                         dash(rounded_mean(t)), dash(rounded(t.duration_min_ms)), dash(rounded(t.duration_max_ms)));
      if (t.events_without_span > 0) {
        out += fmt::format("({} event(s) without a time span excluded from durations)\n", t.events_without_span);
      }
      return out;
    }
    case Format::json: {
      json rows = json::array();
      for (const auto& row : report.rows) rows.push_back(row_to_json(row));
      return json{{"rows", rows}, {"total", row_to_json(report.total)}}.dump(2) + "\n";
    }
  }
  return {};
}

StatsReport stats_from_json(std::string_view json_text) {
  const auto j = json::parse(json_text);
  StatsReport report;
  for (const auto& row : j.at("rows")) report.rows.push_back(row_from_json(row));
  report.total = row_from_json(j.at("total"));
  return report;
}

}  // namespace gesture_asr::stats
