#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gesture_asr/chat.hpp"
#include "gesture_asr/errors.hpp"
#include "gesture_asr/gesture_stats.hpp"
#include "support.hpp"

using namespace gesture_asr;
using namespace gesture_asr::stats;
using testing_support::fixture;
using testing_support::read_file;

namespace {

const chat::Corpus& corpus() {
  static const chat::Corpus c = chat::parse_corpus(fixture("corpus"));
  return c;
}

const GestureStatsRow* row(const StatsReport& r, const std::string& label) {
  for (const auto& x : r.rows)
    if (x.label == label) return &x;
  return nullptr;
}

}  // namespace

TEST(Stats, GoldenRenderings) {
  auto report = compute_stats(corpus());
  EXPECT_EQ(render_stats(report, Format::csv), read_file(fixture("golden/stats.csv")));
  EXPECT_EQ(render_stats(report, Format::table), read_file(fixture("golden/stats.txt")));
  EXPECT_EQ(render_stats(report, Format::json), read_file(fixture("golden/stats.json")));
}

TEST(Stats, HandComputedCuttingRow) {
  auto report = compute_stats(corpus());
  const auto* cutting = row(report, "cutting");
  ASSERT_NE(cutting, nullptr);
  // 2300 + 2300 + 1250 + 650 + 750 + 2222 + 1750 + 1900
  EXPECT_EQ(cutting->duration_total_ms, 13122);
  EXPECT_EQ(cutting->event_count, 8u);
  EXPECT_EQ(cutting->utterance_count, 6u);
  EXPECT_EQ(cutting->user_count, 6u);
  EXPECT_EQ(*cutting->duration_min_ms, 650);
  EXPECT_EQ(*cutting->duration_max_ms, 2300);
  EXPECT_DOUBLE_EQ(*cutting->mean_s(), 13.122 / 8);
}

TEST(Stats, SixCanonicalRowsFirstThenOther) {
  auto report = compute_stats(corpus());
  ASSERT_GE(report.rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(report.rows[i].label, default_gesture_labels()[i].name());
  EXPECT_NE(row(report, "pointing"), nullptr);
}

TEST(Stats, TotalRowWeightedMeanIdentity) {
  auto report = compute_stats(corpus());
  double weighted = 0.0;
  std::size_t timed = 0, utts = 0;
  std::int64_t mn = INT64_MAX, mx = 0;
  for (const auto& r : report.rows) {
    if (r.timed_events() == 0) continue;
    weighted += *r.mean_s() * static_cast<double>(r.timed_events());
    timed += r.timed_events();
    utts += r.utterance_count;
    mn = std::min(mn, *r.duration_min_ms);
    mx = std::max(mx, *r.duration_max_ms);
  }
  EXPECT_NEAR(*report.total.mean_s(), weighted / static_cast<double>(timed), 1e-9);
  EXPECT_EQ(report.total.timed_events(), timed);
  EXPECT_EQ(report.total.utterance_count, utts);
  EXPECT_EQ(*report.total.duration_min_ms, mn);
  EXPECT_EQ(*report.total.duration_max_ms, mx);
}

TEST(Stats, SpanlessEventsCountedButNotTimed) {
  auto report = compute_stats(corpus());
  const auto* opening = row(report, "opening");
  ASSERT_NE(opening, nullptr);
  EXPECT_EQ(opening->events_without_span, 1u);
  EXPECT_EQ(opening->timed_events() + 1, opening->event_count);
  EXPECT_EQ(report.total.events_without_span, 1u);
}

TEST(Stats, PermutationInvariantAndSerialMatchesParallel) {
  auto base = compute_stats(corpus());
  EXPECT_EQ(base, compute_stats_serial(corpus()));
  std::mt19937 rng(7);
  for (int k = 0; k < 20; ++k) {
    auto shuffled = corpus();
    std::shuffle(shuffled.files.begin(), shuffled.files.end(), rng);
    EXPECT_EQ(compute_stats(shuffled), base);
    EXPECT_EQ(compute_stats_serial(shuffled), base);
  }
}

TEST(Stats, EmptyCorpus) {
  auto report = compute_stats(chat::Corpus{});
  EXPECT_EQ(report.total.event_count, 0u);
  EXPECT_FALSE(report.total.mean_s().has_value());
  EXPECT_NO_THROW(render_stats(report, Format::table));
}

TEST(Stats, JsonRoundTrip) {
  auto report = compute_stats(corpus());
  EXPECT_EQ(stats_from_json(render_stats(report, Format::json)), report);
}

TEST(Stats, RoundingIsHalfToEven) {
  EXPECT_EQ(round_ms_ratio_to_centis(5, 1), 0);    // 0.005 s
  EXPECT_EQ(round_ms_ratio_to_centis(15, 1), 2);   // 0.015 s
  EXPECT_EQ(round_ms_ratio_to_centis(25, 1), 2);   // 0.025 s
  EXPECT_EQ(round_ms_ratio_to_centis(3765, 1), 376);
  EXPECT_EQ(round_ms_ratio_to_centis(3775, 1), 378);
  EXPECT_EQ(round_ms_ratio_to_centis(10, 3), 0);   // 3.33 ms
  EXPECT_EQ(round_ms_ratio_to_centis(7530, 2), 376);  // 3765 ms mean
  EXPECT_EQ(format_centis(376), "3.76");
  EXPECT_EQ(format_centis(9), "0.09");
}

TEST(Stats, UnknownFormat) {
  EXPECT_EQ(format_from_string("csv"), Format::csv);
  EXPECT_THROW(format_from_string("xml"), UnknownFormat);
}
