#include "gesture_asr/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace gesture_asr::lexicon {

namespace {

constexpr std::array<std::string_view, 5> kFillers = {"um", "uh", "er", "eh", "mm"};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool all_alpha(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_alpha);
}

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_filler(std::string_view word) {
  const auto lower = to_lower_ascii(word);
  return std::find(kFillers.begin(), kFillers.end(), lower) != kFillers.end();
}

std::optional<FragmentParts> split_fragment(std::string_view token) {
  if (const auto at = token.rfind('@'); at != std::string_view::npos && at > 0) {
    const auto stem = token.substr(0, at);
    const auto code = token.substr(at + 1);
    if (all_alpha(stem) && all_alpha(code)) {
      return FragmentParts{std::string(stem), "@" + std::string(code)};
    }
    return std::nullopt;
  }
  if (token.size() > 1 && token.front() == '&' && all_alpha(token.substr(1))) {
    return FragmentParts{std::string(token.substr(1)), "&"};
  }
  if (token.size() == 1 && is_alpha(token.front())) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(token.front())));
    if (c != 'a' && c != 'i') return FragmentParts{std::string(token), ""};
  }
  return std::nullopt;
}

bool is_punctuation(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return c == '.' || c == '?' || c == '!' || c == ',' || c == ';' || c == ':' || c == '+' ||
           c == '/' || c == '"';
  }) && token.find_first_of(".?!,;:") != std::string_view::npos;
}

std::string base_verb(const GestureLabel& label) {
  switch (label.kind()) {
    case GestureKind::cutting: return "cut";
    case GestureKind::eating: return "eat";
    case GestureKind::folding: return "fold";
    case GestureKind::layering: return "layer";
    case GestureKind::opening: return "open";
    case GestureKind::spreading: return "spread";
    case GestureKind::other: break;
  }
  return label.name();
}

}  // namespace gesture_asr::lexicon
