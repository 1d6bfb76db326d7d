#include "gesture_asr/types.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace gesture_asr {

TimeSpan TimeSpan::make(std::int64_t start_ms, std::int64_t end_ms) {
  if (start_ms < 0 || start_ms >= end_ms) {
    throw std::invalid_argument(fmt::format("invalid time span {}_{}", start_ms, end_ms));
  }
  return TimeSpan{start_ms, end_ms};
}

std::int64_t TimeSpan::overlap_ms(const TimeSpan& other) const noexcept {
  const auto lo = std::max(start_ms, other.start_ms);
  const auto hi = std::min(end_ms, other.end_ms);
  return hi > lo ? hi - lo : 0;
}

std::int64_t TimeSpan::gap_ms(const TimeSpan& other) const noexcept {
  if (other.start_ms >= end_ms) return other.start_ms - end_ms;
  if (start_ms >= other.end_ms) return start_ms - other.end_ms;
  return 0;
}

namespace {

constexpr std::array<std::string_view, 6> kNames = {"cutting", "eating", "folding",
                                                    "layering", "opening", "spreading"};

}  // namespace

GestureLabel::GestureLabel(GestureKind kind) : kind_(kind) {
  if (kind == GestureKind::other) throw std::invalid_argument("use GestureLabel::other(raw)");
  name_ = std::string(kNames[static_cast<std::size_t>(kind)]);
}

GestureLabel GestureLabel::other(std::string raw) {
  GestureLabel label;
  label.kind_ = GestureKind::other;
  label.name_ = std::move(raw);
  return label;
}

GestureLabel GestureLabel::from_string(std::string_view text) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (text == kNames[i]) return GestureLabel(static_cast<GestureKind>(i));
  }
  return other(std::string(text));
}

const std::array<GestureLabel, 6>& default_gesture_labels() {
  static const std::array<GestureLabel, 6> labels = {
      GestureLabel(GestureKind::cutting),  GestureLabel(GestureKind::eating),
      GestureLabel(GestureKind::folding),  GestureLabel(GestureKind::layering),
      GestureLabel(GestureKind::opening),  GestureLabel(GestureKind::spreading)};
  return labels;
}

std::string_view to_string(GestureSource source) {
  return source == GestureSource::annotation ? "annotation" : "model";
}

GestureSource gesture_source_from_string(std::string_view text) {
  if (text == "annotation") return GestureSource::annotation;
  if (text == "model") return GestureSource::model;
  throw std::invalid_argument(fmt::format("unknown gesture source '{}'", text));
}

std::string WordSequence::joined() const {
  return fmt::format("{}", fmt::join(words, " "));
}

}  // namespace gesture_asr
