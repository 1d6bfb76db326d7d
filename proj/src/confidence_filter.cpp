#include "gesture_asr/confidence_filter.hpp"

#include <stdexcept>

#include <fmt/format.h>
#include "json.hpp"

#include "gesture_asr/errors.hpp"
#include "gesture_asr/json_io.hpp"

namespace gesture_asr::asr {

std::string ScoredTranscript::text() const {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token.text;
  }
  return out;
}

WordSequence ScoredTranscript::words() const {
  WordSequence seq;
  for (const auto& token : tokens) seq.words.push_back(token.text);
  return seq;
}

ScoredTranscript filter_tokens(const ScoredTranscript& transcript, double threshold, const FilterOptions& options) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidThreshold(threshold);

  ScoredTranscript out;
  out.audio_id = transcript.audio_id;
  out.source = transcript.source;
  out.filters = transcript.filters;
  for (const auto& token : transcript.tokens) {
    const bool keep = options.inclusive_threshold ? token.confidence >= threshold : token.confidence > threshold;
    if (keep) out.tokens.push_back(token);
  }
  out.filters.push_back({threshold, options.inclusive_threshold, transcript.tokens.size() - out.tokens.size()});
  return out;
}

void validate(const ScoredTranscript& transcript) {
  std::optional<std::int64_t> last_start;
  for (const auto& token : transcript.tokens) {
    if (token.text.empty()) throw std::invalid_argument("empty token text");
    if (!(token.confidence >= 0.0 && token.confidence <= 1.0)) {
      throw std::invalid_argument(fmt::format("confidence {} of '{}' outside [0, 1]", token.confidence, token.text));
    }
    if (token.span) {
      if (last_start && token.span->start_ms < *last_start) {
        throw std::invalid_argument(fmt::format("token '{}' starts before its predecessor", token.text));
      }
      last_start = token.span->start_ms;
    }
  }
}

std::string to_json(const ScoredTranscript& transcript, int indent) {
  return json_io::to_json(transcript).dump(indent) + "\n";
}

ScoredTranscript transcript_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("invalid transcript JSON: ") + e.what());
  }
  return json_io::transcript_from(j);
}

}  // namespace gesture_asr::asr
