#include "gesture_asr/fusion.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "json.hpp"

#include "gesture_asr/asr_eval.hpp"
#include "gesture_asr/chat.hpp"
#include "gesture_asr/errors.hpp"
#include "gesture_asr/frames.hpp"
#include "gesture_asr/json_io.hpp"

namespace gesture_asr::fusion {

using nlohmann::json;

Assignment assign_gestures(std::span<const UtteranceSlot> utterances, std::span<const GestureEvent> events,
                           const OverlapRule& rule) {
  Assignment out;
  for (const auto& u : utterances) out.by_utterance[u.id];

  // same-speaker overlap check
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    for (std::size_t j = i + 1; j < utterances.size(); ++j) {
      const auto& a = utterances[i];
      const auto& b = utterances[j];
      if (a.speaker != b.speaker || !a.span || !b.span) continue;
      if (a.span->overlap_ms(*b.span) > 0)
        out.diagnostics.push_back(fmt::format("utterances {} and {} of speaker {} overlap", a.id, b.id, a.speaker));
    }
  }

  for (const auto& event : events) {
    if (!event.span) {
      if (event.utterance_index && *event.utterance_index < utterances.size()) {
        out.by_utterance[utterances[*event.utterance_index].id].push_back(event);
      } else {
        if (event.utterance_index)
          out.diagnostics.push_back(fmt::format("gesture utterance index {} out of range", *event.utterance_index));
        out.unassigned.push_back(event);
      }
      continue;
    }
    std::optional<std::size_t> best;
    std::int64_t best_overlap = 0;
    for (std::size_t i = 0; i < utterances.size(); ++i) {
      if (!utterances[i].span) continue;
      auto ov = utterances[i].span->overlap_ms(*event.span);
      if (ov > best_overlap) {
        best_overlap = ov;
        best = i;
      }
    }
    if (!best) {
      std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
      for (std::size_t i = 0; i < utterances.size(); ++i) {
        if (!utterances[i].span) continue;
        auto gap = utterances[i].span->gap_ms(*event.span);
        if (gap <= rule.slack_ms && gap < best_gap) {
          best_gap = gap;
          best = i;
        }
      }
    }
    if (best)
      out.by_utterance[utterances[*best].id].push_back(event);
    else
      out.unassigned.push_back(event);
  }
  return out;
}

EnrichedUtterance fuse_utterance(const std::string& id, const WordSequence& asr_words,
                                 std::vector<GestureEvent> gestures, clients::Rewriter& rewriter,
                                 const clients::RewriteContext& context) {
  EnrichedUtterance out;
  out.id = id;
  out.asr_words = asr_words;
  out.gestures = std::move(gestures);
  out.provenance.rewriter_backend = rewriter.id();
  if (asr_words.empty() && out.gestures.empty()) {
    out.skipped = true;
    return out;
  }
  auto ctx = context;
  if (ctx.utterance_id.empty()) ctx.utterance_id = id;
  out.provenance.prompt_hash = rewriter.prompt(asr_words, out.gestures, ctx).hash();
  auto result = rewriter.rewrite(asr_words, out.gestures, ctx);
  if (result.final_text.empty()) throw EmptyResponse();
  out.final_text = std::move(result.final_text);
  out.model_raw = std::move(result.model_raw);
  return out;
}

// --- manifest ----------------------------------------------------------------------

namespace {

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    auto fail = [&](const std::string& msg) -> ManifestError {
      return ManifestError(fmt::format("manifest line {}: {}", line_no, msg));
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw fail("entry must be an object");
    static const std::set<std::string> known{"id",       "audio",           "frames_dir", "cha_file",
                                             "utterance_index", "precomputed_asr"};
    for (const auto& [key, _] : j.items())
      if (!known.count(key)) throw fail("unknown field '" + key + "'");
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
      throw fail("missing string field 'id'");
    ManifestEntry e;
    e.id = j["id"].get<std::string>();
    if (!seen.insert(e.id).second) throw fail("duplicate id '" + e.id + "'");
    auto str_field = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      if (!j[key].is_string()) throw fail(std::string("field '") + key + "' must be a string");
      return j[key].get<std::string>();
    };
    if (auto a = str_field("audio")) {
      if (is_url(*a))
        e.audio_url = *a;
      else
        e.audio = resolve(base_dir, *a);
    }
    if (auto f = str_field("frames_dir")) e.frames_dir = resolve(base_dir, *f);
    if (auto c = str_field("cha_file")) e.cha_file = resolve(base_dir, *c);
    if (j.contains("utterance_index") && !j["utterance_index"].is_null()) {
      if (!j["utterance_index"].is_number_unsigned()) throw fail("field 'utterance_index' must be a non-negative integer");
      e.utterance_index = j["utterance_index"].get<std::size_t>();
    }
    if (j.contains("precomputed_asr") && !j["precomputed_asr"].is_null()) {
      const auto& p = j["precomputed_asr"];
      try {
        if (p.is_string())
          e.precomputed_asr = asr::transcript_from_json(read_file(resolve(base_dir, p.get<std::string>())));
        else if (p.is_object())
          e.precomputed_asr = json_io::transcript_from(p);
        else
          throw fail("field 'precomputed_asr' must be an object or a path");
      } catch (const DecodeError& err) {
        throw fail(std::string("precomputed_asr: ") + err.what());
      } catch (const IoError& err) {
        throw fail(err.what());
      }
    }
    if (e.utterance_index && !e.cha_file) throw fail("'utterance_index' requires 'cha_file'");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

GestureMode gesture_mode_from_string(std::string_view text) {
  if (text == "auto") return GestureMode::automatic;
  if (text == "annotations") return GestureMode::annotations;
  if (text == "model") return GestureMode::model;
  if (text == "none") return GestureMode::none;
  throw ConfigError("unknown gesture source: " + std::string(text));
}

std::string_view to_string(GestureMode mode) {
  switch (mode) {
    case GestureMode::automatic: return "auto";
    case GestureMode::annotations: return "annotations";
    case GestureMode::model: return "model";
    case GestureMode::none: return "none";
  }
  return "auto";
}

// --- pipeline ----------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 6> kStages{"input", "asr", "filter", "gesture", "assign", "rewrite"};

struct ItemOutcome {
  std::variant<EnrichedUtterance, Failure> result;
  std::array<double, kStages.size()> ms{};
};

class StageClock {
 public:
  explicit StageClock(std::array<double, kStages.size()>& ms) : ms_(ms) {}
  void enter(std::size_t stage) {
    stop();
    current_ = stage;
    start_ = std::chrono::steady_clock::now();
  }
  void stop() {
    if (current_ < kStages.size())
      ms_[current_] += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    current_ = kStages.size();
  }
  const char* name() const { return current_ < kStages.size() ? kStages[current_] : "input"; }

 private:
  std::array<double, kStages.size()>& ms_;
  std::size_t current_ = kStages.size();
  std::chrono::steady_clock::time_point start_;
};

std::optional<TimeSpan> token_extent(const asr::ScoredTranscript& t) {
  std::optional<TimeSpan> out;
  for (const auto& tok : t.tokens) {
    if (!tok.span) continue;
    if (!out)
      out = tok.span;
    else
      out = TimeSpan{std::min(out->start_ms, tok.span->start_ms), std::max(out->end_ms, tok.span->end_ms)};
  }
  return out;
}

ItemOutcome process(const ManifestEntry& entry, const Clients& clients, const PipelineConfig& config) {
  ItemOutcome outcome;
  StageClock clock(outcome.ms);
  try {
    clock.enter(0);  // input
    std::optional<chat::TranscriptFile> file;
    const chat::Utterance* utt = nullptr;
    if (entry.cha_file) {
      file = chat::parse_path(*entry.cha_file);
      if (entry.utterance_index) {
        if (*entry.utterance_index >= file->utterances.size())
          throw std::out_of_range(fmt::format("utterance_index {} out of range ({} utterances)",
                                              *entry.utterance_index, file->utterances.size()));
        utt = &file->utterances[*entry.utterance_index];
      }
    }

    clock.enter(1);  // asr
    asr::ScoredTranscript transcript;
    std::string asr_backend;
    if (entry.precomputed_asr) {
      transcript = *entry.precomputed_asr;
      asr_backend = transcript.source.empty() ? "precomputed" : transcript.source;
    } else if (entry.audio || entry.audio_url) {
      if (!clients.asr) throw std::runtime_error("no speech recognizer configured");
      auto ref = entry.audio ? clients::AudioRef::from_path(*entry.audio) : clients::AudioRef::from_url(*entry.audio_url);
      transcript = clients.asr->recognize(ref);
      asr_backend = clients.asr->id();
    } else {
      throw std::runtime_error("entry has neither audio nor precomputed_asr");
    }
    asr::validate(transcript);

    clock.enter(2);  // filter
    asr::ScoredTranscript kept = transcript;
    if (config.filter_enabled)
      kept = asr::filter_tokens(transcript, config.threshold, {.inclusive_threshold = config.inclusive_threshold});
    auto words = eval::normalize(kept.text(), {.keep_fillers = true, .keep_fragments = true});
    std::optional<double> min_conf;
    for (const auto& tok : kept.tokens)
      if (!eval::normalize(tok.text, {.keep_fillers = true, .keep_fragments = true}).empty())
        min_conf = min_conf ? std::min(*min_conf, tok.confidence) : tok.confidence;

    clock.enter(3);  // gesture
    std::optional<TimeSpan> segment = utt && utt->span ? utt->span : token_extent(transcript);
    auto mode = config.gesture_mode;
    if (mode == GestureMode::automatic) {
      if (entry.frames_dir && clients.gesture)
        mode = GestureMode::model;
      else if (utt)
        mode = GestureMode::annotations;
      else
        mode = GestureMode::none;
    }
    std::vector<GestureEvent> events;
    std::string gesture_backend = "none";
    if (mode == GestureMode::model) {
      if (!entry.frames_dir) throw std::runtime_error("gesture model requested but entry has no frames_dir");
      if (!clients.gesture) throw std::runtime_error("no gesture recognizer configured");
      auto frames = clients::sample_frames(*entry.frames_dir, segment, config.frames_per_segment);
      events = clients.gesture->recognize(frames, config.candidates);
      gesture_backend = clients.gesture->id();
    } else if (mode == GestureMode::annotations) {
      if (!utt) throw std::runtime_error("annotation gestures need cha_file and utterance_index");
      for (auto& ev : chat::extract_gesture_events(*file))
        if (ev.utterance_index == utt->index) {
          ev.utterance_index = 0;  // index into the single slot below
          events.push_back(std::move(ev));
        }
      gesture_backend = "annotation";
    }

    clock.enter(4);  // assign
    UtteranceSlot slot{entry.id, segment, utt ? utt->speaker : std::string()};
    std::vector<GestureEvent> gestures;
    std::size_t unassigned = 0;
    if (!segment) {
      // nothing to align against: the events already belong to this item
      gestures = events;
    } else {
      auto assignment = assign_gestures(std::span(&slot, 1), events, config.overlap);
      gestures = std::move(assignment.by_utterance[entry.id]);
      unassigned = assignment.unassigned.size();
    }

    clock.enter(5);  // rewrite
    if (!clients.rewriter) throw std::runtime_error("no rewriter configured");
    clients::RewriteContext ctx;
    ctx.utterance_id = entry.id;
    ctx.speaker = slot.speaker;
    ctx.task = config.task;
    auto enriched = fuse_utterance(entry.id, words, std::move(gestures), *clients.rewriter, ctx);
    clock.stop();

    if (utt) enriched.original_text = utt->body_text();
    enriched.asr_text = transcript.text();
    enriched.unassigned_gestures = unassigned;
    enriched.provenance.asr_backend = asr_backend;
    enriched.provenance.gesture_backend = gesture_backend;
    if (config.filter_enabled) enriched.provenance.threshold = config.threshold;
    enriched.provenance.inclusive_threshold = config.inclusive_threshold;
    enriched.provenance.min_rewriter_confidence = min_conf;
    outcome.result = std::move(enriched);
  } catch (const std::exception& e) {
    std::string stage = clock.name();
    clock.stop();
    outcome.result = Failure{entry.id, stage, e.what()};
  }
  return outcome;
}

}  // namespace

PipelineReport run_pipeline(const std::vector<ManifestEntry>& manifest, const Clients& clients,
                            const PipelineConfig& config) {
  if (config.parallel < 1) throw ConfigError("parallel must be >= 1");
  if (config.threshold < 0.0 || config.threshold > 1.0) throw InvalidThreshold(config.threshold);

  const auto n = static_cast<std::int64_t>(manifest.size());
  std::vector<ItemOutcome> outcomes(manifest.size());
  std::vector<char> ran(manifest.size(), 0);

#pragma omp parallel for schedule(dynamic, 1) num_threads(config.parallel) if (config.parallel > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    if (config.cancel && config.cancel->cancelled()) continue;
    outcomes[i] = process(manifest[i], clients, config);
    ran[i] = 1;
  }

  PipelineReport report;
  report.manifest_size = manifest.size();
  for (const auto* stage : kStages) report.stage_ms[stage] = 0.0;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!ran[i]) {
      report.failures.push_back({manifest[i].id, "cancelled", "cancelled before processing"});
      report.incomplete = true;
      continue;
    }
    for (std::size_t s = 0; s < kStages.size(); ++s) report.stage_ms[kStages[s]] += outcomes[i].ms[s];
    if (auto* ok = std::get_if<EnrichedUtterance>(&outcomes[i].result)) {
      report.utterances.push_back(std::move(*ok));
    } else {
      auto& failure = std::get<Failure>(outcomes[i].result);
      // an item interrupted mid-flight also marks the run incomplete
      if (config.cancel && config.cancel->cancelled()) report.incomplete = true;
      report.failures.push_back(std::move(failure));
    }
  }
  return report;
}

// --- report I/O ----------------------------------------------------------------------

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json utterance_json(const EnrichedUtterance& u) {
  json gestures = json::array();
  for (const auto& g : u.gestures) gestures.push_back(json_io::to_json(g));
  const auto& p = u.provenance;
  return json{{"id", u.id},
              {"original_text", u.original_text ? json(*u.original_text) : json(nullptr)},
              {"asr_text", u.asr_text},
              {"asr_words", u.asr_words.words},
              {"gestures", gestures},
              {"unassigned_gestures", u.unassigned_gestures},
              {"final_text", u.final_text},
              {"model_raw", u.model_raw},
              {"skipped", u.skipped},
              {"provenance",
               {{"asr_backend", p.asr_backend},
                {"gesture_backend", p.gesture_backend},
                {"rewriter_backend", p.rewriter_backend},
                {"threshold", opt(p.threshold)},
                {"inclusive_threshold", p.inclusive_threshold},
                {"prompt_hash", p.prompt_hash},
                {"min_rewriter_confidence", opt(p.min_rewriter_confidence)}}}};
}

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string report_to_json(const PipelineReport& report, bool include_timing) {
  json utts = json::array();
  for (const auto& u : report.utterances) utts.push_back(utterance_json(u));
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back({{"id", f.id}, {"stage", f.stage}, {"error", f.error}});
  json j{{"manifest_size", report.manifest_size},
         {"succeeded", report.utterances.size()},
         {"failed", report.failures.size()},
         {"incomplete", report.incomplete},
         {"utterances", utts},
         {"failures", failures}};
  if (include_timing) j["timing_ms"] = report.stage_ms;
  return j.dump(2) + "\n";
}

PipelineReport report_from_json(std::string_view json_text) {
  PipelineReport report;
  try {
    auto j = json::parse(json_text);
    report.manifest_size = j.at("manifest_size").get<std::size_t>();
    report.incomplete = j.value("incomplete", false);
    for (const auto& u : j.at("utterances")) {
      EnrichedUtterance e;
      e.id = u.at("id").get<std::string>();
      if (u.contains("original_text") && !u["original_text"].is_null())
        e.original_text = u["original_text"].get<std::string>();
      e.asr_text = u.at("asr_text").get<std::string>();
      e.asr_words.words = u.at("asr_words").get<std::vector<std::string>>();
      for (const auto& g : u.at("gestures")) e.gestures.push_back(json_io::gesture_event_from(g));
      e.unassigned_gestures = u.value("unassigned_gestures", std::size_t{0});
      e.final_text = u.at("final_text").get<std::string>();
      e.model_raw = u.value("model_raw", std::string());
      e.skipped = u.value("skipped", false);
      const auto& p = u.at("provenance");
      e.provenance.asr_backend = p.at("asr_backend").get<std::string>();
      e.provenance.gesture_backend = p.at("gesture_backend").get<std::string>();
      e.provenance.rewriter_backend = p.at("rewriter_backend").get<std::string>();
      e.provenance.threshold = get_opt(p, "threshold");
      e.provenance.inclusive_threshold = p.value("inclusive_threshold", false);
      e.provenance.prompt_hash = p.value("prompt_hash", std::string());
      e.provenance.min_rewriter_confidence = get_opt(p, "min_rewriter_confidence");
      report.utterances.push_back(std::move(e));
    }
    for (const auto& f : j.at("failures"))
      report.failures.push_back(
          {f.at("id").get<std::string>(), f.at("stage").get<std::string>(), f.at("error").get<std::string>()});
    if (j.contains("timing_ms")) report.stage_ms = j["timing_ms"].get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw DecodeError(std::string("pipeline report: ") + e.what());
  }
  return report;
}

namespace {

// Display width in code points; good enough for the mostly-ASCII corpus.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); }

}  // namespace

std::string render_case_report(const PipelineReport& report) {
  std::vector<std::array<std::string, 4>> rows;
  rows.push_back({"Index", "Original", "ASR", "Ours"});
  std::size_t index = 1;
  for (const auto& u : report.utterances)
    rows.push_back({std::to_string(index++), u.original_text.value_or("-"), u.asr_text.empty() ? "-" : u.asr_text,
                    u.skipped ? "(skipped)" : u.final_text});
  std::array<std::size_t, 4> w{};
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 4; ++c) w[c] = std::max(w[c], width(r[c]));
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < 4; ++c) {
      line += c == 3 ? rows[i][c] : pad(rows[i][c], w[c]) + "  ";
    }
    out += line + "\n";
    if (i == 0) {
      std::string rule;
      for (std::size_t c = 0; c < 4; ++c) rule += std::string(w[c], '-') + (c == 3 ? "" : "  ");
      out += rule + "\n";
    }
  }
  for (const auto& f : report.failures) out += fmt::format("failed: {} at {}: {}\n", f.id, f.stage, f.error);
  if (report.incomplete) out += "report incomplete: run was cancelled\n";
  return out;
}

std::string case_report_json(const PipelineReport& report) {
  json rows = json::array();
  std::size_t index = 1;
  for (const auto& u : report.utterances)
    rows.push_back({{"index", index++},
                    {"id", u.id},
                    {"original", u.original_text ? json(*u.original_text) : json(nullptr)},
                    {"asr", u.asr_text},
                    {"ours", u.final_text},
                    {"skipped", u.skipped}});
  return json{{"rows", rows}, {"incomplete", report.incomplete}}.dump(2) + "\n";
}

}  // namespace gesture_asr::fusion
