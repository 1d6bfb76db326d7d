#pragma once

// Parser and serializer for the subset of the TalkBank CHAT format used by the
// gesture-annotated aphasia transcripts:
//
//   @Key:\tvalue                         header (kept verbatim, in order)
//   *PAR:\ttokens [terminator] \x15s_e\x15  main tier with optional time bullet
//   %mor:\t...                           dependent tier (opaque, attached to the
//                                        preceding main tier)
//
// Inside a main tier: [gesture:<label>] groups (a directly adjacent bullet gives
// the gesture its own span), word@u fragments, fillers, terminal punctuation and
// other bracketed codes such as [/] kept as opaque tokens. Lines starting with a
// tab continue the previous line.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gesture_asr/types.hpp"

namespace gesture_asr::chat {

struct Word {
  std::string text;
  friend bool operator==(const Word&, const Word&) = default;
};

struct Filler {
  std::string text;
  friend bool operator==(const Filler&, const Filler&) = default;
};

/// Literal source text is kept in `text` ("uz@u", "&w", "w").
struct Fragment {
  std::string text;
  std::string marker;
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct GestureAnnotation {
  GestureLabel label;
  std::optional<TimeSpan> span;
  friend bool operator==(const GestureAnnotation&, const GestureAnnotation&) = default;
};

struct Punct {
  std::string text;
  friend bool operator==(const Punct&, const Punct&) = default;
};

/// Bracketed code outside the modelled subset, e.g. "[/]" or "[* p]"; text includes brackets.
struct OpaqueCode {
  std::string text;
  friend bool operator==(const OpaqueCode&, const OpaqueCode&) = default;
};

using Token = std::variant<Word, Filler, Fragment, GestureAnnotation, Punct, OpaqueCode>;

/// Canonical surface form of a single token.
std::string token_text(const Token& token);

struct Header {
  std::string key;    // without the leading '@' and trailing ':'
  std::string value;  // empty for @Begin / @End
  bool has_value = true;
  std::size_t position = 0;  // number of utterances preceding the header
  friend bool operator==(const Header&, const Header&) = default;
};

struct DependentTier {
  std::string key;  // "mor", "gra", ...
  std::string value;
  friend bool operator==(const DependentTier&, const DependentTier&) = default;
};

struct ParticipantInfo {
  std::string code;
  std::string role;
  std::map<std::string, std::string> demographics;
  friend bool operator==(const ParticipantInfo&, const ParticipantInfo&) = default;
};

struct Utterance {
  std::size_t index = 0;
  std::string speaker;
  std::vector<Token> tokens;
  std::optional<TimeSpan> span;
  std::vector<DependentTier> dependents;

  /// Tokens in canonical form, without speaker or bullet.
  std::string body_text() const;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct TranscriptFile {
  std::string path;
  std::vector<Header> headers;
  std::vector<ParticipantInfo> participants;
  std::vector<Utterance> utterances;

  const ParticipantInfo* participant(std::string_view code) const;

  friend bool operator==(const TranscriptFile&, const TranscriptFile&) = default;
};

struct Diagnostic {
  std::string path;
  std::string message;
  std::size_t line = 0;  // 0 when not tied to a line
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct Corpus {
  std::vector<TranscriptFile> files;
  std::vector<Diagnostic> diagnostics;
};

struct CorpusOptions {
  std::string extension = ".cha";
  bool parallel = true;
};

/// Throws SyntaxError on an unparseable tier line and EncodingError on invalid UTF-8.
TranscriptFile parse_file(std::string_view source_text, std::string path = {});

/// Reads and parses one file from disk; IoError when unreadable.
TranscriptFile parse_path(const std::filesystem::path& path);

/// Recursively collects files with the configured extension in lexicographic
/// path order. Per-file failures go to `diagnostics`.
Corpus parse_corpus(const std::filesystem::path& root, const CorpusOptions& options = {});

std::string serialize(const TranscriptFile& file);
std::string serialize(const Utterance& utterance);

/// One event per gesture annotation, in document order.
std::vector<GestureEvent> extract_gesture_events(const TranscriptFile& file);

/// Throws EncodingError naming the byte offset of the first invalid sequence.
void validate_utf8(std::string_view text);

}  // namespace gesture_asr::chat
