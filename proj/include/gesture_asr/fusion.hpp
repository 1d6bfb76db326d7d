#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_asr/clients.hpp"
#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/http_clients.hpp"
#include "gesture_asr/types.hpp"

namespace gesture_asr::fusion {

// --- temporal assignment ---------------------------------------------------------

struct UtteranceSlot {
  std::string id;
  std::optional<TimeSpan> span;
  std::string speaker;
};

struct OverlapRule {
  /// Zero-overlap events within this distance go to the nearest utterance.
  std::int64_t slack_ms = 500;
};

struct Assignment {
  std::map<std::string, std::vector<GestureEvent>> by_utterance;  // every slot id present
  std::vector<GestureEvent> unassigned;
  std::vector<std::string> diagnostics;  // overlapping spans of one speaker, bad indices
};

/// Spanned events go to the utterance with maximal overlap (earlier utterance on
/// ties), else to the nearest one within the slack window, else to `unassigned`.
/// Span-less events keep their utterance_index, which indexes `utterances`.
Assignment assign_gestures(std::span<const UtteranceSlot> utterances, std::span<const GestureEvent> events,
                           const OverlapRule& rule = {});

// --- fusion ------------------------------------------------------------------------

struct Provenance {
  std::string asr_backend;
  std::string gesture_backend;  // backend id, "annotation" or "none"
  std::string rewriter_backend;
  std::optional<double> threshold;  // absent when filtering was disabled
  bool inclusive_threshold = false;
  std::string prompt_hash;
  /// Lowest confidence among the tokens handed to the rewriter.
  std::optional<double> min_rewriter_confidence;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct EnrichedUtterance {
  std::string id;
  std::optional<std::string> original_text;  // annotated transcript line, when known
  std::string asr_text;                      // ASR output before filtering
  WordSequence asr_words;                    // after filtering
  std::vector<GestureEvent> gestures;
  std::size_t unassigned_gestures = 0;
  std::string final_text;
  std::string model_raw;
  bool skipped = false;  // no words and no gestures: rewriter not called
  Provenance provenance;

  friend bool operator==(const EnrichedUtterance&, const EnrichedUtterance&) = default;
};

/// Calls the rewriter exactly once, unless both words and gestures are empty.
/// Gestures are passed through as given, repeats included.
EnrichedUtterance fuse_utterance(const std::string& id, const WordSequence& asr_words,
                                 std::vector<GestureEvent> gestures, clients::Rewriter& rewriter,
                                 const clients::RewriteContext& context = {});

// --- pipeline ------------------------------------------------------------------------

struct ManifestEntry {
  std::string id;
  std::optional<std::filesystem::path> audio;
  std::optional<std::string> audio_url;
  std::optional<std::filesystem::path> frames_dir;
  std::optional<std::filesystem::path> cha_file;
  std::optional<std::size_t> utterance_index;
  std::optional<asr::ScoredTranscript> precomputed_asr;
};

/// JSON lines: {id, audio?, frames_dir?, cha_file?, utterance_index?, precomputed_asr?}.
/// `audio` may be a path or an http(s) URL; `precomputed_asr` an inline transcript
/// object or a path to one. Relative paths resolve against `base_dir`.
/// Throws ManifestError naming the line.
std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

enum class GestureMode { automatic, annotations, model, none };
GestureMode gesture_mode_from_string(std::string_view text);
std::string_view to_string(GestureMode mode);

struct Clients {
  std::shared_ptr<clients::SpeechRecognizer> asr;
  std::shared_ptr<clients::GestureRecognizer> gesture;
  std::shared_ptr<clients::Rewriter> rewriter;
};

struct PipelineConfig {
  bool filter_enabled = true;
  double threshold = asr::kDefaultThreshold;
  bool inclusive_threshold = false;
  GestureMode gesture_mode = GestureMode::automatic;
  std::vector<GestureLabel> candidates{default_gesture_labels().begin(), default_gesture_labels().end()};
  std::size_t frames_per_segment = 4;
  OverlapRule overlap;
  int parallel = 1;
  std::string task = clients::RewriteContext{}.task;
  std::shared_ptr<clients::CancelSource> cancel;
};

struct Failure {
  std::string id;
  std::string stage;  // input, asr, filter, gesture, assign, rewrite, cancelled
  std::string error;
  friend bool operator==(const Failure&, const Failure&) = default;
};

struct PipelineReport {
  std::vector<EnrichedUtterance> utterances;
  std::vector<Failure> failures;
  std::map<std::string, double> stage_ms;
  std::size_t manifest_size = 0;
  bool incomplete = false;  // cancelled before every item ran
};

/// Runs ASR (or loads it), filtering, gesture recognition (or annotation
/// extraction), assignment and rewriting per entry. Per-item errors become
/// failures; output order follows the manifest.
PipelineReport run_pipeline(const std::vector<ManifestEntry>& manifest, const Clients& clients,
                            const PipelineConfig& config = {});

/// Report JSON; `include_timing` false gives a run-independent document.
std::string report_to_json(const PipelineReport& report, bool include_timing = true);
PipelineReport report_from_json(std::string_view json_text);

/// Three-column comparison: Original / ASR / Ours.
std::string render_case_report(const PipelineReport& report);
std::string case_report_json(const PipelineReport& report);

}  // namespace gesture_asr::fusion
