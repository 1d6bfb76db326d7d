#pragma once

// Pluggable backends for the three pipeline functions: speech recognition,
// zero-shot gesture recognition and contextual rewriting.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/types.hpp"

namespace gesture_asr::clients {

/// Audio input. Exactly one of path/url is set.
class AudioRef {
 public:
  static AudioRef from_path(std::filesystem::path path, std::optional<std::int64_t> duration_ms = std::nullopt);
  static AudioRef from_url(std::string url, std::optional<std::int64_t> duration_ms = std::nullopt);

  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }
  const std::optional<std::string>& url() const noexcept { return url_; }
  /// wav, mp3 or flac, taken from the extension.
  const std::string& format() const noexcept { return format_; }
  const std::optional<std::int64_t>& duration_ms() const noexcept { return duration_ms_; }

  /// File stem, used as the audio id ("clips/audio-17.wav" -> "audio-17").
  std::string id() const;

 private:
  std::optional<std::filesystem::path> path_;
  std::optional<std::string> url_;
  std::string format_;
  std::optional<std::int64_t> duration_ms_;
};

struct Frame {
  std::filesystem::path path;
  std::int64_t timestamp_ms = 0;
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Pre-extracted video frames of one segment, ordered by timestamp.
struct FrameSet {
  std::string id;
  TimeSpan segment;
  std::vector<Frame> frames;

  /// Throws std::invalid_argument unless timestamps lie in `segment` and strictly increase.
  void validate() const;
};

struct RewriteContext {
  std::string utterance_id;
  std::string speaker;
  std::string task = "explaining how to make a peanut butter and jelly sandwich";
  std::string previous_text;
};

struct RewriteResult {
  std::string final_text;
  std::string model_raw;
  std::vector<GestureLabel> used_gestures;
};

/// Fully rendered prompt sent to a multimodal model.
struct PromptBundle {
  std::string system;
  std::string user;
  std::vector<std::filesystem::path> images;

  /// Hex SHA-256 over system, user and image paths.
  std::string hash() const;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

class SpeechRecognizer {
 public:
  virtual ~SpeechRecognizer() = default;
  virtual std::string id() const = 0;
  virtual asr::ScoredTranscript recognize(const AudioRef& audio) = 0;
};

class GestureRecognizer {
 public:
  virtual ~GestureRecognizer() = default;
  virtual std::string id() const = 0;
  /// Every returned label is one of `candidates` or Other.
  virtual std::vector<GestureEvent> recognize(const FrameSet& frames, std::span<const GestureLabel> candidates) = 0;
};

class Rewriter {
 public:
  virtual ~Rewriter() = default;
  virtual std::string id() const = 0;
  virtual RewriteResult rewrite(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                                const RewriteContext& context) = 0;
  /// Prompt this rewriter would send; recorded in provenance.
  virtual PromptBundle prompt(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                              const RewriteContext& context) const;
};

}  // namespace gesture_asr::clients
