#include "gesture_asr/json_io.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "gesture_asr/errors.hpp"

namespace gesture_asr::json_io {

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DecodeError(fmt::format("missing field '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DecodeError(fmt::format("field '{}' has the wrong type", key));
  }
}

std::string token_kind(const chat::Token& token) {
  static constexpr const char* kKinds[] = {"word", "filler", "fragment", "gesture", "punct", "code"};
  return kKinds[token.index()];
}

}  // namespace

void put_span(json& j, const std::optional<TimeSpan>& span) {
  if (!span) return;
  j["start_ms"] = span->start_ms;
  j["end_ms"] = span->end_ms;
}

std::optional<TimeSpan> get_span(const json& j) {
  const bool has_start = j.contains("start_ms") && !j["start_ms"].is_null();
  const bool has_end = j.contains("end_ms") && !j["end_ms"].is_null();
  if (!has_start && !has_end) return std::nullopt;
  if (has_start != has_end) throw DecodeError("start_ms and end_ms must be given together");
  const auto start = field<std::int64_t>(j, "start_ms");
  const auto end = field<std::int64_t>(j, "end_ms");
  try {
    return TimeSpan::make(start, end);
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
}

json to_json(const TimeSpan& span) { return json{{"start_ms", span.start_ms}, {"end_ms", span.end_ms}}; }

json to_json(const GestureEvent& event) {
  json j{{"label", event.label.name()}, {"source", std::string(to_string(event.source))}};
  put_span(j, event.span);
  if (event.confidence) j["confidence"] = *event.confidence;
  if (event.utterance_index) j["utterance_index"] = *event.utterance_index;
  return j;
}

GestureEvent gesture_event_from(const json& j) {
  GestureEvent event;
  const auto label = field<std::string>(j, "label");
  if (label.empty()) throw DecodeError("gesture label is empty");
  event.label = GestureLabel::from_string(label);
  event.span = get_span(j);
  if (j.contains("confidence") && !j["confidence"].is_null()) {
    const auto c = field<double>(j, "confidence");
    if (!(c >= 0.0 && c <= 1.0)) throw DecodeError("gesture confidence outside [0, 1]");
    event.confidence = c;
  }
  if (j.contains("source")) {
    try {
      event.source = gesture_source_from_string(field<std::string>(j, "source"));
    } catch (const std::invalid_argument& e) {
      throw DecodeError(e.what());
    }
  }
  if (j.contains("utterance_index") && !j["utterance_index"].is_null()) {
    event.utterance_index = field<std::size_t>(j, "utterance_index");
  }
  return event;
}

json to_json(const asr::ScoredTranscript& transcript) {
  json tokens = json::array();
  for (const auto& token : transcript.tokens) {
    json t{{"text", token.text}, {"confidence", token.confidence}};
    put_span(t, token.span);
    tokens.push_back(std::move(t));
  }
  json j{{"audio_id", transcript.audio_id}, {"source", transcript.source}, {"tokens", std::move(tokens)}};
  if (!transcript.filters.empty()) {
    json filters = json::array();
    for (const auto& f : transcript.filters) {
      filters.push_back({{"threshold", f.threshold}, {"inclusive", f.inclusive}, {"removed", f.removed}});
    }
    j["filters"] = std::move(filters);
  }
  return j;
}

asr::ScoredTranscript transcript_from(const json& j) {
  asr::ScoredTranscript t;
  t.audio_id = field<std::string>(j, "audio_id");
  t.source = j.contains("source") ? field<std::string>(j, "source") : std::string();
  const auto& tokens = j.contains("tokens") ? j.at("tokens") : json();
  if (!tokens.is_array()) throw DecodeError("field 'tokens' must be an array");
  for (const auto& tj : tokens) {
    asr::ScoredToken token;
    token.text = field<std::string>(tj, "text");
    token.confidence = field<double>(tj, "confidence");
    token.span = get_span(tj);
    t.tokens.push_back(std::move(token));
  }
  if (j.contains("filters")) {
    for (const auto& fj : j.at("filters")) {
      t.filters.push_back(
          {field<double>(fj, "threshold"), field<bool>(fj, "inclusive"), field<std::size_t>(fj, "removed")});
    }
  }
  try {
    asr::validate(t);
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
  return t;
}

json to_json(const chat::TranscriptFile& file) {
  json participants = json::array();
  for (const auto& p : file.participants) {
    participants.push_back({{"code", p.code}, {"role", p.role}, {"demographics", p.demographics}});
  }
  json headers = json::array();
  for (const auto& h : file.headers) {
    json hj{{"key", h.key}, {"position", h.position}};
    if (h.has_value) hj["value"] = h.value;
    headers.push_back(std::move(hj));
  }
  json utterances = json::array();
  for (const auto& u : file.utterances) {
    json tokens = json::array();
    for (const auto& token : u.tokens) {
      json tj{{"kind", token_kind(token)}};
      if (const auto* g = std::get_if<chat::GestureAnnotation>(&token)) {
        tj["label"] = g->label.name();
        tj["known_label"] = !g->label.is_other();
        put_span(tj, g->span);
      } else if (const auto* f = std::get_if<chat::Fragment>(&token)) {
        tj["text"] = f->text;
        tj["marker"] = f->marker;
      } else {
        tj["text"] = chat::token_text(token);
      }
      tokens.push_back(std::move(tj));
    }
    json uj{{"index", u.index}, {"speaker", u.speaker}, {"tokens", std::move(tokens)}};
    put_span(uj, u.span);
    if (!u.dependents.empty()) {
      json deps = json::object();
      for (const auto& d : u.dependents) deps[d.key] = d.value;
      uj["dependents"] = std::move(deps);
    }
    utterances.push_back(std::move(uj));
  }
  return json{{"path", file.path},
              {"headers", std::move(headers)},
              {"participants", std::move(participants)},
              {"utterances", std::move(utterances)}};
}

}  // namespace gesture_asr::json_io
