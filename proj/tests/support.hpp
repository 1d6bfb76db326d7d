#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/types.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(GASR_FIXTURES) / rel; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Exponential recursion straight from the definition of edit distance.
inline std::size_t brute_distance(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                  std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const auto del = brute_distance(a, b, i + 1, j) + 1;
  const auto ins = brute_distance(a, b, i, j + 1) + 1;
  const auto sub = brute_distance(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
  return std::min({del, ins, sub});
}

inline gesture_asr::WordSequence random_words(std::mt19937& rng, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  gesture_asr::WordSequence out;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out.words.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
  return out;
}

// Confidences are drawn from a small grid so ties with the threshold actually happen.
inline gesture_asr::asr::ScoredTranscript random_transcript(std::mt19937& rng) {
  static const std::vector<std::string> vocab{"i", "um", "cut", "tomato", "banana", "and", "right", "uh", "bread"};
  std::uniform_int_distribution<std::size_t> len(0, 12);
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> grid(0, 20);
  gesture_asr::asr::ScoredTranscript t;
  t.audio_id = "rand";
  t.source = "test";
  const auto n = len(rng);
  std::int64_t at = 0;
  for (std::size_t i = 0; i < n; ++i) {
    gesture_asr::asr::ScoredToken tok;
    tok.text = vocab[word(rng)];
    tok.confidence = grid(rng) / 20.0;
    tok.span = gesture_asr::TimeSpan{at, at + 300};
    at += 350;
    t.tokens.push_back(tok);
  }
  return t;
}

}  // namespace testing_support
