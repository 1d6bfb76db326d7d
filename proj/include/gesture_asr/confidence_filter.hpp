#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_asr/types.hpp"

namespace gesture_asr::asr {

inline constexpr double kDefaultThreshold = 0.2;

struct ScoredToken {
  std::string text;
  double confidence = 0.0;
  std::optional<TimeSpan> span;

  friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

struct FilterRecord {
  double threshold = kDefaultThreshold;
  bool inclusive = false;
  std::size_t removed = 0;

  friend bool operator==(const FilterRecord&, const FilterRecord&) = default;
};

/// Preliminary ASR transcript: words with backend-reported confidences.
struct ScoredTranscript {
  std::string audio_id;
  std::string source;  // backend identifier
  std::vector<ScoredToken> tokens;
  std::vector<FilterRecord> filters;  // applied filters, oldest first

  /// Token texts joined by spaces.
  std::string text() const;
  WordSequence words() const;

  friend bool operator==(const ScoredTranscript&, const ScoredTranscript&) = default;
};

struct FilterOptions {
  /// Keep tokens with confidence >= threshold instead of > threshold.
  bool inclusive_threshold = false;
};

/// Keeps the tokens with confidence > threshold (>= when inclusive), in order,
/// and appends a FilterRecord. Throws InvalidThreshold outside [0, 1].
ScoredTranscript filter_tokens(const ScoredTranscript& transcript, double threshold,
                               const FilterOptions& options = {});

/// Throws std::invalid_argument when a confidence lies outside [0, 1], a token
/// is empty, or token spans are not non-decreasing by start.
void validate(const ScoredTranscript& transcript);

/// {audio_id, source, tokens: [{text, confidence, start_ms?, end_ms?}], filters?}
std::string to_json(const ScoredTranscript& transcript, int indent = 2);
/// Throws DecodeError on schema violations.
ScoredTranscript transcript_from_json(std::string_view json_text);

}  // namespace gesture_asr::asr
