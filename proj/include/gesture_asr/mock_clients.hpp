#pragma once

// Deterministic offline backends. Identical inputs always give identical outputs.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gesture_asr/clients.hpp"

namespace gesture_asr::clients {

/// Serves fixed transcripts keyed by audio id; unknown ids raise BackendError(404).
class MockSpeechRecognizer : public SpeechRecognizer {
 public:
  explicit MockSpeechRecognizer(std::map<std::string, asr::ScoredTranscript> fixtures);

  /// {"<audio id>": {"tokens": [{"text", "confidence", ...}]}, ...}
  static MockSpeechRecognizer from_file(const std::filesystem::path& path);

  std::string id() const override { return "mock-asr"; }
  asr::ScoredTranscript recognize(const AudioRef& audio) override;

 private:
  std::map<std::string, asr::ScoredTranscript> fixtures_;
};

/// Returns fixed labels keyed by frame-set id. Ids listed in `fail_ids` raise
/// BackendError(503) for fault-injection runs; unknown ids raise BackendError(404).
class MockGestureRecognizer : public GestureRecognizer {
 public:
  MockGestureRecognizer(std::map<std::string, std::vector<std::string>> labels, std::set<std::string> fail_ids = {});

  /// {"labels": {"<frame set id>": ["cutting"]}, "fail": ["<frame set id>"]}
  static MockGestureRecognizer from_file(const std::filesystem::path& path);

  std::string id() const override { return "mock-gesture"; }
  std::vector<GestureEvent> recognize(const FrameSet& frames, std::span<const GestureLabel> candidates) override;

 private:
  std::map<std::string, std::vector<std::string>> labels_;
  std::set<std::string> fail_ids_;
};

/// Rule-based stand-in for the rewriting LLM.
///
/// Fillers mark the places where speech broke down: each gesture fills the next
/// filler slot (base verb after a subject pronoun, gerund otherwise) and the
/// remaining gestures are appended as gerunds after the last word. Consecutive
/// repeats of a gesture collapse into one verb. Without gestures the words pass
/// through unchanged.
class MockRewriter : public Rewriter {
 public:
  std::string id() const override { return "mock-rewriter"; }
  RewriteResult rewrite(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                        const RewriteContext& context) override;
};

}  // namespace gesture_asr::clients
