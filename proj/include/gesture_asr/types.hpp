#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gesture_asr {

/// Half-open interval in milliseconds.
struct TimeSpan {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  /// Throws std::invalid_argument unless 0 <= start < end.
  static TimeSpan make(std::int64_t start_ms, std::int64_t end_ms);

  std::int64_t duration_ms() const noexcept { return end_ms - start_ms; }
  double duration_s() const noexcept { return static_cast<double>(duration_ms()) / 1000.0; }

  /// Length of the intersection with `other`, 0 when disjoint.
  std::int64_t overlap_ms(const TimeSpan& other) const noexcept;
  /// Distance between the two spans, 0 when they touch or overlap.
  std::int64_t gap_ms(const TimeSpan& other) const noexcept;
  bool contains(std::int64_t t_ms) const noexcept { return t_ms >= start_ms && t_ms < end_ms; }

  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

enum class GestureKind { cutting, eating, folding, layering, opening, spreading, other };

/// One of the six iconic gesture types of the sandwich task, or an unrecognized raw label.
class GestureLabel {
 public:
  GestureLabel() = default;
  explicit GestureLabel(GestureKind kind);
  static GestureLabel other(std::string raw);

  /// Maps the six canonical names onto their kinds; any other text becomes Other(text).
  static GestureLabel from_string(std::string_view text);

  GestureKind kind() const noexcept { return kind_; }
  bool is_other() const noexcept { return kind_ == GestureKind::other; }
  /// Canonical name for the six kinds, the raw text for Other.
  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const GestureLabel&, const GestureLabel&) = default;
  friend auto operator<=>(const GestureLabel& a, const GestureLabel& b) {
    if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
    return a.name_ <=> b.name_;
  }

 private:
  GestureKind kind_ = GestureKind::other;
  std::string name_;
};

/// cutting, eating, folding, layering, opening, spreading.
const std::array<GestureLabel, 6>& default_gesture_labels();

enum class GestureSource { annotation, model };

std::string_view to_string(GestureSource source);
GestureSource gesture_source_from_string(std::string_view text);

struct GestureEvent {
  GestureLabel label;
  std::optional<TimeSpan> span;
  std::optional<double> confidence;
  GestureSource source = GestureSource::annotation;
  std::optional<std::size_t> utterance_index;

  friend bool operator==(const GestureEvent&, const GestureEvent&) = default;
};

/// Normalized words: lowercase, non-empty, no whitespace.
struct WordSequence {
  std::vector<std::string> words;

  std::size_t size() const noexcept { return words.size(); }
  bool empty() const noexcept { return words.empty(); }
  std::string joined() const;

  friend bool operator==(const WordSequence&, const WordSequence&) = default;
};

}  // namespace gesture_asr
