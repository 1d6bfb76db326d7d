#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gesture_asr/types.hpp"

namespace gesture_asr::lexicon {

/// um, uh, er, eh, mm (case-insensitive).
bool is_filler(std::string_view word);

struct FragmentParts {
  std::string stem;    // letters only, e.g. "uz"
  std::string marker;  // "@u", "&" or "" for a stranded letter
};

/// Recognizes "uz@u"-style forms, "&w" phonological fragments and stranded
/// single letters other than "a" and "i".
std::optional<FragmentParts> split_fragment(std::string_view token);

/// True when every character is terminal or internal punctuation (".", "?", "+...", ",").
bool is_punctuation(std::string_view token);

std::string to_lower_ascii(std::string_view text);

/// Base verb for a label ("cutting" -> "cut"); Other labels map to their raw text.
std::string base_verb(const GestureLabel& label);

}  // namespace gesture_asr::lexicon
