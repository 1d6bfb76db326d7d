#include <gtest/gtest.h>

#include <random>

#include "gesture_asr/errors.hpp"
#include "gesture_asr/frames.hpp"
#include "gesture_asr/mock_clients.hpp"
#include "gesture_asr/prompts.hpp"
#include "support.hpp"

using namespace gesture_asr;
using namespace gesture_asr::clients;
using testing_support::fixture;

namespace {

WordSequence ws(std::initializer_list<const char*> words) {
  WordSequence out;
  for (const auto* w : words) out.words.emplace_back(w);
  return out;
}

GestureEvent ev(std::string_view label) {
  GestureEvent e;
  e.label = GestureLabel::from_string(label);
  e.source = GestureSource::model;
  return e;
}

std::span<const GestureLabel> six() { return default_gesture_labels(); }

}  // namespace

TEST(Labels, DefaultsAreTheSixGestureTypes) {
  std::vector<std::string> names;
  for (const auto& l : default_gesture_labels()) names.push_back(l.name());
  EXPECT_EQ(names, (std::vector<std::string>{"cutting", "eating", "folding", "layering", "opening", "spreading"}));
  EXPECT_TRUE(GestureLabel::from_string("pointing").is_other());
}

TEST(AudioRefTest, IdAndFormat) {
  auto a = AudioRef::from_path("clips/audio-17.wav");
  EXPECT_EQ(a.id(), "audio-17");
  EXPECT_EQ(a.format(), "wav");
  EXPECT_FALSE(a.url().has_value());
  auto u = AudioRef::from_url("https://example.org/x/clip.flac");
  EXPECT_EQ(u.format(), "flac");
  EXPECT_FALSE(u.path().has_value());
}

TEST(MockAsr, EchoesFixtureAndRejectsUnknown) {
  asr::ScoredTranscript t;
  t.tokens = {{"I", 0.9, {}}, {"um", 0.15, {}}, {"tomato", 0.8, {}}};
  MockSpeechRecognizer mock({{"audio-17", t}});
  auto out = mock.recognize(AudioRef::from_path("audio-17.wav"));
  EXPECT_EQ(out.tokens, t.tokens);
  EXPECT_EQ(out.source, "mock-asr");
  EXPECT_EQ(out.audio_id, "audio-17");
  try {
    mock.recognize(AudioRef::from_path("nope.wav"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(MockGesture, KeyedOnFrameSetAndFaultInjection) {
  MockGestureRecognizer mock({{"seg-3", {"cutting"}}, {"seg-4", {"pointing"}}}, {"seg-9"});
  FrameSet frames{"seg-3", TimeSpan{0, 1000}, {{"a.jpg", 10}}};
  auto events = mock.recognize(frames, six());
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].label.kind(), GestureKind::cutting);
  EXPECT_EQ(events[0].source, GestureSource::model);
  EXPECT_EQ(*events[0].span, frames.segment);

  frames.id = "seg-4";
  EXPECT_TRUE(mock.recognize(frames, six())[0].label.is_other());
  frames.id = "seg-9";
  EXPECT_THROW(mock.recognize(frames, six()), BackendError);
  frames.id = "seg-0";
  EXPECT_THROW(mock.recognize(frames, six()), BackendError);
}

TEST(MockRewriterTest, PaperExamples) {
  MockRewriter r;
  EXPECT_EQ(r.rewrite(ws({"i", "um", "tomato"}), std::vector{ev("cutting")}, {}).final_text, "I cut tomato");
  EXPECT_EQ(r.rewrite(ws({"and"}), std::vector{ev("eating")}, {}).final_text, "and eating");
  EXPECT_EQ(r.rewrite(ws({"um", "banana"}), std::vector{ev("cutting"), ev("cutting")}, {}).final_text,
            "cutting banana");
  EXPECT_NE(r.rewrite(ws({"right"}), std::vector{ev("folding")}, {}).final_text.find("folding"), std::string::npos);
  EXPECT_EQ(r.rewrite(ws({"banana"}), {}, {}).final_text, "banana");
  EXPECT_THROW(r.rewrite({}, {}, {}), EmptyResponse);
}

TEST(MockRewriterTest, Deterministic) {
  MockRewriter r;
  std::mt19937 rng(5);
  for (int k = 0; k < 100; ++k) {
    auto w = testing_support::random_words(rng, 6, 3);
    std::vector<GestureEvent> g;
    if (k % 2) g.push_back(ev(default_gesture_labels()[k % 6].name()));
    if (w.empty() && g.empty()) continue;
    EXPECT_EQ(r.rewrite(w, g, {}).final_text, r.rewrite(w, g, {}).final_text);
  }
}

TEST(Prompts, GesturePromptListsAllCandidatesAndIsDeterministic) {
  FrameSet frames{"seg-1", TimeSpan{1000, 3000}, {{"f1.jpg", 1000}, {"f2.jpg", 2000}}};
  auto a = build_gesture_prompt(frames, six());
  auto b = build_gesture_prompt(frames, six());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 64u);
  for (const auto& l : default_gesture_labels()) EXPECT_NE(a.user.find(l.name()), std::string::npos) << l.name();
  EXPECT_EQ(a.images.size(), 2u);
}

TEST(Prompts, RewritePromptHasEachGestureOncePerEvent) {
  std::vector<GestureEvent> g{ev("cutting"), ev("cutting"), ev("eating")};
  auto p = build_rewrite_prompt(ws({"um", "banana"}), g, {});
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = p.user.find(needle); pos != std::string::npos; pos = p.user.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("[gesture:cutting]"), 2u);
  EXPECT_EQ(count("[gesture:eating]"), 1u);
  EXPECT_NE(p.user.find("um banana"), std::string::npos);
  EXPECT_NE(build_rewrite_prompt(ws({"x"}), {}, {}).hash(), p.hash());
}

TEST(Prompts, TemplateErrors) {
  EXPECT_EQ(render_template("a {{x}} b", {{"x", "1"}}), "a 1 b");
  EXPECT_THROW(render_template("a {{y}}", {{"x", "1"}}), TemplateError);
  EXPECT_THROW(render_template("a {{x", {{"x", "1"}}), TemplateError);
  auto t = PromptTemplates::defaults();
  EXPECT_NO_THROW(check_templates(t));
  t.rewrite_user = "no placeholders";
  EXPECT_THROW(check_templates(t), TemplateError);
}

TEST(LabelParser, StrictThenFallback) {
  EXPECT_EQ(parse_gesture_response("spreading", six())->kind(), GestureKind::spreading);
  EXPECT_EQ(parse_gesture_response("The gesture is: spreading.", six())->kind(), GestureKind::spreading);
  EXPECT_EQ(parse_gesture_response("[gesture:folding]", six())->kind(), GestureKind::folding);
  EXPECT_EQ(parse_gesture_response("They cut the bread", six())->kind(), GestureKind::cutting);
  EXPECT_FALSE(parse_gesture_response("none", six()).has_value());
  EXPECT_THROW(parse_gesture_response("a waving hand", six()), UnparseableLabel);
  EXPECT_TRUE(parse_gesture_response("a waving hand", six(), {.unparseable_as_other = true})->is_other());
  EXPECT_THROW(parse_gesture_response("cutting or eating", six()), UnparseableLabel);
}

TEST(LabelParser, AnyResponseWithExactlyOneCandidate) {
  static const std::vector<std::string> filler{"the", "person", "is", "probably", "shows", "a", "motion", "of",
                                               "hands", "here", "clearly", "gesture"};
  std::mt19937 rng(17);
  std::uniform_int_distribution<std::size_t> pick(0, filler.size() - 1), len(0, 8), lab(0, 5);
  std::uniform_int_distribution<int> punct(0, 3);
  const char* marks[] = {"", ".", ",", ":"};
  for (int k = 0; k < 1000; ++k) {
    const auto& label = default_gesture_labels()[lab(rng)];
    std::vector<std::string> words;
    for (std::size_t i = len(rng); i > 0; --i) words.push_back(filler[pick(rng)]);
    std::uniform_int_distribution<std::size_t> at(0, words.size());
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at(rng)), label.name() + marks[punct(rng)]);
    std::string response;
    for (const auto& w : words) response += (response.empty() ? "" : " ") + w;
    auto parsed = parse_gesture_response(response, six());
    ASSERT_TRUE(parsed.has_value()) << response;
    ASSERT_EQ(*parsed, label) << response;
  }
}

TEST(Frames, SamplingWithinSegment) {
  auto dir = fixture("case_study/frames/case-3");
  auto all = list_frames(dir);
  ASSERT_EQ(all.size(), 6u);
  auto set = sample_frames(dir, TimeSpan{7000, 9300}, 4);
  EXPECT_EQ(set.id, "case-3");
  ASSERT_EQ(set.frames.size(), 4u);
  EXPECT_EQ(set.frames.front().timestamp_ms, all.front().timestamp_ms);
  EXPECT_EQ(set.frames.back().timestamp_ms, all.back().timestamp_ms);
  EXPECT_NO_THROW(set.validate());
  EXPECT_THROW(sample_frames(dir, TimeSpan{0, 100}, 4), std::invalid_argument);
  EXPECT_THROW(sample_frames(fixture("nope"), std::nullopt, 4), IoError);
}

TEST(Frames, ValidateRejectsOutOfOrder) {
  FrameSet bad{"x", TimeSpan{0, 100}, {{"a.jpg", 50}, {"b.jpg", 40}}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  FrameSet outside{"x", TimeSpan{0, 100}, {{"a.jpg", 150}}};
  EXPECT_THROW(outside.validate(), std::invalid_argument);
}
