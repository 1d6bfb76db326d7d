#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gesture_asr/types.hpp"

namespace gesture_asr::eval {

struct NormalizationConfig {
  bool keep_fillers = true;
  bool keep_fragments = false;  // when kept, "uz@u" becomes "uz"

  friend bool operator==(const NormalizationConfig&, const NormalizationConfig&) = default;
};

/// Lowercases, drops punctuation, gesture groups, other bracketed codes and time
/// bullets, and applies the filler/fragment toggles. Accepts both CHAT tier
/// bodies and free ASR text ("Um... Banana.").
WordSequence normalize(std::string_view raw, const NormalizationConfig& config = {});

struct Match {
  std::size_t ref;
  std::size_t hyp;
  friend bool operator==(const Match&, const Match&) = default;
};
struct Substitute {
  std::size_t ref;
  std::size_t hyp;
  friend bool operator==(const Substitute&, const Substitute&) = default;
};
struct Delete {
  std::size_t ref;
  friend bool operator==(const Delete&, const Delete&) = default;
};
struct Insert {
  std::size_t hyp;
  friend bool operator==(const Insert&, const Insert&) = default;
};

using EditOp = std::variant<Match, Substitute, Delete, Insert>;

struct Alignment {
  std::vector<EditOp> ops;

  std::size_t cost() const;
  /// Rebuilds the hypothesis by applying the ops to `ref`.
  std::vector<std::string> apply(const WordSequence& ref, const WordSequence& hyp) const;

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

/// Minimum edit alignment with unit S/D/I costs. Backtrace prefers
/// Match > Substitute > Delete > Insert on ties.
Alignment align(const WordSequence& ref, const WordSequence& hyp);

/// Levenshtein distance over words, without the backtrace.
std::size_t edit_distance(const WordSequence& ref, const WordSequence& hyp);

enum class EmptyReferencePolicy {
  undefined,   // wer absent unless hyp is also empty (then 0)
  hyp_length,  // wer = |hyp|
  strict,      // throw EmptyReference
};

struct WerScore {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t hits = 0;
  std::size_t ref_len = 0;
  std::size_t hyp_len = 0;
  std::optional<double> wer;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }

  friend bool operator==(const WerScore&, const WerScore&) = default;
};

WerScore wer(const WordSequence& ref, const WordSequence& hyp,
             EmptyReferencePolicy policy = EmptyReferencePolicy::undefined);

struct WerItem {
  std::string id;
  std::string ref;
  std::string hyp;
};

struct WerConfig {
  NormalizationConfig normalization;
  bool parallel = true;
};

struct ItemScore {
  std::string id;
  WerScore score;
  friend bool operator==(const ItemScore&, const ItemScore&) = default;
};

struct WerReport {
  std::vector<ItemScore> per_item;
  std::vector<std::string> skipped;  // empty normalized reference
  std::optional<double> average_wer;  // macro: mean of per-item wer
  std::optional<double> micro_wer;    // sum of errors / sum of reference words
  NormalizationConfig normalization;

  friend bool operator==(const WerReport&, const WerReport&) = default;
};

/// Macro-averaged WER over items. Throws DuplicateId.
WerReport corpus_wer(const std::vector<WerItem>& items, const WerConfig& config = {});

/// Single-threaded reference kept for testing and benchmarking.
WerReport corpus_wer_serial(const std::vector<WerItem>& items, const WerConfig& config = {});

std::string report_to_json(const WerReport& report);
WerReport report_from_json(std::string_view json_text);
std::string render_report_table(const WerReport& report);

}  // namespace gesture_asr::eval
