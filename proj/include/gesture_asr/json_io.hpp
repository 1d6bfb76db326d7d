#pragma once

// JSON conversions shared by the report and wire formats.

#include "json.hpp"

#include "gesture_asr/chat.hpp"
#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/types.hpp"

namespace gesture_asr::json_io {

using nlohmann::json;

json to_json(const TimeSpan& span);
json to_json(const GestureEvent& event);
json to_json(const asr::ScoredTranscript& transcript);
json to_json(const chat::TranscriptFile& file);

/// Decoders throw DecodeError with the offending field named.
GestureEvent gesture_event_from(const json& j);
asr::ScoredTranscript transcript_from(const json& j);

/// Writes start_ms/end_ms into `j` when `span` is set.
void put_span(json& j, const std::optional<TimeSpan>& span);
/// Reads optional start_ms/end_ms; both or neither must be present.
std::optional<TimeSpan> get_span(const json& j);

}  // namespace gesture_asr::json_io
