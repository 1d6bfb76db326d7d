#include <gtest/gtest.h>

#include <random>

#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/errors.hpp"
#include "support.hpp"

using namespace gesture_asr;
using namespace gesture_asr::asr;

namespace {

ScoredTranscript sample() {
  ScoredTranscript t;
  t.audio_id = "audio-17";
  t.source = "mock-asr";
  t.tokens = {{"I", 0.9, TimeSpan{0, 300}}, {"um", 0.15, TimeSpan{300, 700}}, {"tomato", 0.8, TimeSpan{900, 1500}}};
  return t;
}

bool is_subsequence(const std::vector<ScoredToken>& sub, const std::vector<ScoredToken>& full) {
  std::size_t j = 0;
  for (const auto& tok : full)
    if (j < sub.size() && sub[j] == tok) ++j;
  return j == sub.size();
}

}  // namespace

TEST(Filter, Example) {
  auto out = filter_tokens(sample(), 0.2);
  ASSERT_EQ(out.tokens.size(), 2u);
  EXPECT_EQ(out.tokens[0].text, "I");
  EXPECT_EQ(out.tokens[1].text, "tomato");
  EXPECT_EQ(out.audio_id, "audio-17");
  EXPECT_EQ(out.source, "mock-asr");
  ASSERT_EQ(out.filters.size(), 1u);
  EXPECT_EQ(out.filters[0].removed, 1u);
  EXPECT_EQ(out.text(), "I tomato");
}

TEST(Filter, Boundaries) {
  auto t = sample();
  t.tokens.push_back({"zero", 0.0, std::nullopt});
  t.tokens.push_back({"edge", 0.2, std::nullopt});
  auto at_zero = filter_tokens(t, 0.0);
  EXPECT_EQ(at_zero.tokens.size(), 4u);  // only the 0.0 token goes
  auto strict = filter_tokens(t, 0.2);
  for (const auto& tok : strict.tokens) EXPECT_NE(tok.text, "edge");
  auto inclusive = filter_tokens(t, 0.2, {.inclusive_threshold = true});
  EXPECT_EQ(inclusive.tokens.back().text, "edge");
  EXPECT_EQ(filter_tokens(t, 1.0).tokens.size(), 0u);
}

TEST(Filter, InvalidThreshold) {
  EXPECT_THROW(filter_tokens(sample(), -0.01), InvalidThreshold);
  EXPECT_THROW(filter_tokens(sample(), 1.5), InvalidThreshold);
  EXPECT_THROW(filter_tokens(sample(), std::nan("")), InvalidThreshold);
}

TEST(Filter, PropertiesOnRandomTranscripts) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> grid(0, 20);
  for (int k = 0; k < 1500; ++k) {
    auto t = testing_support::random_transcript(rng);
    double t1 = grid(rng) / 20.0, t2 = grid(rng) / 20.0;
    if (t1 > t2) std::swap(t1, t2);
    auto once = filter_tokens(t, t1);
    ASSERT_TRUE(is_subsequence(once.tokens, t.tokens));
    for (const auto& tok : once.tokens) ASSERT_GT(tok.confidence, t1);
    std::size_t expected = 0;
    for (const auto& tok : t.tokens) expected += tok.confidence > t1;
    ASSERT_EQ(once.tokens.size(), expected);
    auto twice = filter_tokens(once, t1);
    ASSERT_EQ(twice.tokens, once.tokens);
    ASSERT_EQ(twice.audio_id, once.audio_id);
    ASSERT_EQ(twice.source, once.source);
    ASSERT_EQ(twice.filters.back().removed, 0u);
    auto higher = filter_tokens(t, t2);
    ASSERT_TRUE(is_subsequence(higher.tokens, once.tokens));
  }
}

TEST(Filter, Validate) {
  EXPECT_NO_THROW(validate(sample()));
  auto bad = sample();
  bad.tokens[0].confidence = 1.2;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  auto unordered = sample();
  std::swap(unordered.tokens[0], unordered.tokens[2]);
  EXPECT_THROW(validate(unordered), std::invalid_argument);
}

TEST(Filter, JsonRoundTrip) {
  auto t = filter_tokens(sample(), 0.2);
  EXPECT_EQ(transcript_from_json(to_json(t)), t);
  EXPECT_THROW(transcript_from_json("{\"tokens\": 3}"), DecodeError);
  EXPECT_THROW(transcript_from_json("not json"), DecodeError);
}
