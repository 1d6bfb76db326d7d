#include <gtest/gtest.h>

#include "gesture_asr/chat.hpp"
#include "gesture_asr/errors.hpp"
#include "support.hpp"

using namespace gesture_asr;
using namespace gesture_asr::chat;
using testing_support::fixture;

namespace {

const char* kSample =
    "@UTF8\n"
    "@Begin\n"
    "@Participants:\tPAR Participant, INV Investigator\n"
    "@ID:\teng|aphasia|PAR|62;|male|Broca||Participant|||\n"
    "*INV:\thow do you make it ? \x15" "0_900\x15\n"
    "*PAR:\ti um [gesture:cutting]\x15" "1200_2400\x15 uz@u tomato . \x15" "1000_3000\x15\n"
    "%mor:\tpro|I n|tomato .\n"
    "*PAR:\t&b bread [gesture::opening] [/] w\n"
    "\tjar .\n"
    "@End\n";

}  // namespace

TEST(ChatParse, HeadersParticipantsAndTokens) {
  auto file = parse_file(kSample, "sample.cha");
  ASSERT_EQ(file.utterances.size(), 3u);
  EXPECT_EQ(file.headers.front().key, "UTF8");
  EXPECT_FALSE(file.headers.front().has_value);
  ASSERT_EQ(file.participants.size(), 2u);
  const auto* par = file.participant("PAR");
  ASSERT_NE(par, nullptr);
  EXPECT_EQ(par->role, "Participant");
  EXPECT_FALSE(par->demographics.empty());

  const auto& u = file.utterances[1];
  EXPECT_EQ(u.speaker, "PAR");
  ASSERT_TRUE(u.span.has_value());
  EXPECT_EQ(*u.span, (TimeSpan{1000, 3000}));
  ASSERT_EQ(u.tokens.size(), 6u);
  EXPECT_TRUE(std::holds_alternative<Word>(u.tokens[0]));
  EXPECT_TRUE(std::holds_alternative<Filler>(u.tokens[1]));
  const auto& g = std::get<GestureAnnotation>(u.tokens[2]);
  EXPECT_EQ(g.label.kind(), GestureKind::cutting);
  ASSERT_TRUE(g.span.has_value());
  EXPECT_EQ(*g.span, (TimeSpan{1200, 2400}));
  EXPECT_TRUE(std::holds_alternative<Fragment>(u.tokens[3]));
  EXPECT_TRUE(std::holds_alternative<Punct>(u.tokens[5]));
  ASSERT_EQ(u.dependents.size(), 1u);
  EXPECT_EQ(u.dependents[0].key, "mor");
}

TEST(ChatParse, DoubleColonContinuationAndOpaqueCodes) {
  auto file = parse_file(kSample);
  const auto& u = file.utterances[2];
  EXPECT_FALSE(u.span.has_value());
  bool saw_opening = false, saw_code = false, saw_stranded = false, saw_jar = false;
  for (const auto& t : u.tokens) {
    if (auto* g = std::get_if<GestureAnnotation>(&t)) saw_opening = g->label.kind() == GestureKind::opening;
    if (auto* c = std::get_if<OpaqueCode>(&t)) saw_code = c->text == "[/]";
    if (auto* f = std::get_if<Fragment>(&t)) saw_stranded = saw_stranded || f->text == "w";
    if (auto* w = std::get_if<Word>(&t)) saw_jar = saw_jar || w->text == "jar";
  }
  EXPECT_TRUE(saw_opening);
  EXPECT_TRUE(saw_code);
  EXPECT_TRUE(saw_stranded);
  EXPECT_TRUE(saw_jar);
  // canonical single-colon form on output
  EXPECT_NE(serialize(u).find("[gesture:opening]"), std::string::npos);
  EXPECT_EQ(serialize(u).find("gesture::"), std::string::npos);
}

TEST(ChatParse, MisplacedBulletIsSyntaxErrorWithLine) {
  try {
    parse_file("@Begin\n*PAR:\tum \x15" "1_2\x15 banana .\n@End\n");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ChatParse, UndeclaredSpeakerRejected) {
  EXPECT_THROW(parse_file("@Participants:\tPAR Participant\n*INV:\thello .\n"), SyntaxError);
}

TEST(ChatParse, ParticipantsInferredWithoutHeader) {
  auto file = parse_file("*PAR:\thello .\n*INV:\thi .\n*PAR:\tbye .\n");
  ASSERT_EQ(file.participants.size(), 2u);
  EXPECT_EQ(file.participants[0].code, "PAR");
  EXPECT_EQ(file.participants[1].code, "INV");
}

TEST(ChatParse, MalformedTiersRejected) {
  EXPECT_THROW(parse_file("*par:\thello .\n"), SyntaxError);
  EXPECT_THROW(parse_file("*PAR:\t<the jar> [/] jar .\n"), SyntaxError);
  EXPECT_THROW(parse_file("*PAR:\t[gesture:Cutting] .\n"), SyntaxError);
  EXPECT_THROW(parse_file("*PAR:\t[gesture:cutting .\n"), SyntaxError);
  EXPECT_THROW(parse_file("%mor:\tn|jar\n"), SyntaxError);
}

TEST(ChatParse, EncodingAndBom) {
  auto file = parse_file("\xEF\xBB\xBF*PAR:\thello .\n");
  ASSERT_EQ(file.utterances.size(), 1u);
  EXPECT_THROW(parse_file("*PAR:\tcaf\xE9 .\n"), EncodingError);
  EXPECT_NO_THROW(validate_utf8("caf\xC3\xA9"));
  EXPECT_THROW(validate_utf8("\xC0\xAF"), EncodingError);
}

TEST(ChatParse, EmptyInputGivesEmptyFile) {
  auto file = parse_file("");
  EXPECT_TRUE(file.utterances.empty());
  EXPECT_TRUE(file.headers.empty());
}

TEST(ChatRoundTrip, SampleIsFixedPoint) {
  auto first = parse_file(kSample);
  auto second = parse_file(serialize(first));
  EXPECT_EQ(first.headers, second.headers);
  EXPECT_EQ(first.participants, second.participants);
  EXPECT_EQ(first.utterances, second.utterances);
  EXPECT_EQ(serialize(first), serialize(second));
}

TEST(ChatRoundTrip, EveryFixtureFile) {
  auto corpus = parse_corpus(fixture("corpus"));
  ASSERT_GE(corpus.files.size(), 12u);
  EXPECT_TRUE(corpus.diagnostics.empty());
  for (const auto& f : corpus.files) {
    auto again = parse_file(serialize(f), f.path);
    EXPECT_EQ(again, f) << f.path;
  }
}

TEST(ChatCorpus, FixtureCoversTheFormat) {
  auto corpus = parse_corpus(fixture("corpus"));
  std::set<GestureKind> kinds;
  bool fragment = false, filler = false, bullet = false, other = false, nested = false;
  for (const auto& f : corpus.files) {
    nested = nested || f.path.find('/') != std::string::npos;
    for (const auto& u : f.utterances) {
      bullet = bullet || u.span.has_value();
      for (const auto& t : u.tokens) {
        fragment = fragment || std::holds_alternative<Fragment>(t);
        filler = filler || std::holds_alternative<Filler>(t);
        if (auto* g = std::get_if<GestureAnnotation>(&t)) {
          kinds.insert(g->label.kind());
          other = other || g->label.is_other();
        }
      }
    }
  }
  EXPECT_EQ(kinds.size(), 7u);  // six labels plus Other
  EXPECT_TRUE(fragment && filler && bullet && other && nested);
  auto raw = testing_support::read_file(fixture("corpus/pbj_02.cha"));
  EXPECT_NE(raw.find("[gesture::opening]"), std::string::npos);
}

TEST(ChatCorpus, SortedRelativePathsAndParallelMatchesSerial) {
  auto par = parse_corpus(fixture("corpus"), {.parallel = true});
  auto ser = parse_corpus(fixture("corpus"), {.parallel = false});
  ASSERT_EQ(par.files.size(), ser.files.size());
  for (std::size_t i = 0; i < par.files.size(); ++i) EXPECT_EQ(par.files[i], ser.files[i]);
  for (std::size_t i = 1; i < par.files.size(); ++i) EXPECT_LT(par.files[i - 1].path, par.files[i].path);
  EXPECT_EQ(par.files.front().path, "case_study.cha");
}

TEST(ChatCorpus, MalformedFilesBecomeDiagnostics) {
  auto corpus = parse_corpus(fixture("malformed"));
  ASSERT_EQ(corpus.files.size(), 1u);
  ASSERT_EQ(corpus.diagnostics.size(), 2u);
  EXPECT_EQ(corpus.diagnostics[0].path, "bad_bullet.cha");
  EXPECT_EQ(corpus.diagnostics[0].line, 3u);
  EXPECT_EQ(corpus.diagnostics[1].path, "bad_utf8.cha");
  EXPECT_THROW(parse_corpus(fixture("does-not-exist")), IoError);
}

TEST(ChatEvents, SpanFallsBackToUtterance) {
  auto file = parse_file(kSample);
  auto events = extract_gesture_events(file);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(*events[0].span, (TimeSpan{1200, 2400}));
  EXPECT_EQ(events[0].utterance_index, 1u);
  EXPECT_FALSE(events[1].span.has_value());
  EXPECT_EQ(events[1].source, GestureSource::annotation);
}
