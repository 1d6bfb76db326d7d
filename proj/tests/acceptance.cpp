// Acceptance checks, one PASS/FAIL line each. Exit status is non-zero when any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sys/wait.h>

#include <fmt/format.h>

#include "json.hpp"

#include "gesture_asr/asr_eval.hpp"
#include "gesture_asr/chat.hpp"
#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/fusion.hpp"
#include "gesture_asr/gesture_stats.hpp"
#include "gesture_asr/mock_clients.hpp"
#include "support.hpp"

using namespace gesture_asr;
using testing_support::fixture;
using testing_support::read_file;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void check(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
}

int run_command(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome wer_oracle() {
  auto start = Clock::now();
  std::mt19937 rng(4242);
  const int pairs = 500;
  int agree = 0;
  for (int k = 0; k < pairs; ++k) {
    auto ref = testing_support::random_words(rng, 8, 4);
    auto hyp = testing_support::random_words(rng, 8, 4);
    if (eval::align(ref, hyp).cost() == testing_support::brute_distance(ref.words, hyp.words)) ++agree;
  }
  double t = seconds_since(start);
  return {agree == pairs && t < 10.0, fmt::format("{}/{} pairs agree with brute force, {:.2f} s", agree, pairs, t)};
}

Outcome wer_hand() {
  auto s = eval::wer(WordSequence{{"i", "cut", "tomato"}}, WordSequence{{"i", "tomato"}});
  auto id = eval::wer(WordSequence{{"i", "cut", "tomato"}}, WordSequence{{"i", "cut", "tomato"}});
  bool ok = s.wer && *s.wer == 1.0 / 3.0 && s.deletions == 1 && id.wer && *id.wer == 0.0;
  return {ok, fmt::format("wer = {} (expected 1/3), identity = {}", s.wer.value_or(-1), id.wer.value_or(-1))};
}

Outcome parser_roundtrip() {
  auto corpus = chat::parse_corpus(fixture("corpus"));
  std::size_t fixed = 0;
  std::set<GestureKind> kinds;
  bool fragment = false, filler = false, bullet = false;
  for (const auto& f : corpus.files) {
    auto once = chat::parse_file(chat::serialize(f), f.path);
    auto twice = chat::parse_file(chat::serialize(once), f.path);
    if (once == f && twice == once) ++fixed;
    for (const auto& u : f.utterances) {
      bullet = bullet || u.span;
      for (const auto& t : u.tokens) {
        fragment = fragment || std::holds_alternative<chat::Fragment>(t);
        filler = filler || std::holds_alternative<chat::Filler>(t);
        if (auto* g = std::get_if<chat::GestureAnnotation>(&t)) kinds.insert(g->label.kind());
      }
    }
  }
  bool double_colon = read_file(fixture("corpus/pbj_02.cha")).find("[gesture::") != std::string::npos;
  bool coverage = kinds.size() >= 6 && fragment && filler && bullet && double_colon;
  bool ok = corpus.files.size() >= 12 && fixed == corpus.files.size() && corpus.diagnostics.empty() && coverage;
  return {ok, fmt::format("{}/{} files are fixed points, coverage {}", fixed, corpus.files.size(),
                          coverage ? "complete" : "incomplete")};
}

Outcome stats_golden() {
  auto corpus = chat::parse_corpus(fixture("corpus"));
  auto report = stats::compute_stats(corpus);
  bool bytes = stats::render_stats(report, stats::Format::csv) == read_file(fixture("golden/stats.csv")) &&
               stats::render_stats(report, stats::Format::table) == read_file(fixture("golden/stats.txt")) &&
               stats::render_stats(report, stats::Format::json) == read_file(fixture("golden/stats.json"));
  double weighted = 0.0;
  double timed = 0.0;
  for (const auto& r : report.rows) {
    if (!r.mean_s()) continue;
    weighted += *r.mean_s() * static_cast<double>(r.timed_events());
    timed += static_cast<double>(r.timed_events());
  }
  double diff = std::abs(*report.total.mean_s() - weighted / timed);
  return {bytes && diff < 1e-9,
          fmt::format("golden {}, weighted-mean gap {:.3g}", bytes ? "identical" : "differs", diff)};
}

Outcome filter_properties() {
  std::mt19937 rng(777);
  std::uniform_int_distribution<int> grid(0, 20);
  const int n = 1000;
  int ok = 0;
  for (int k = 0; k < n; ++k) {
    auto t = testing_support::random_transcript(rng);
    double a = grid(rng) / 20.0, b = grid(rng) / 20.0;
    if (a > b) std::swap(a, b);
    auto fa = asr::filter_tokens(t, a);
    auto fb = asr::filter_tokens(t, b);
    bool subseq = true;
    std::size_t j = 0;
    for (const auto& tok : t.tokens)
      if (j < fa.tokens.size() && fa.tokens[j] == tok) ++j;
    subseq = j == fa.tokens.size();
    bool idem = asr::filter_tokens(fa, a).tokens == fa.tokens;
    std::size_t k2 = 0;
    for (const auto& tok : fa.tokens)
      if (k2 < fb.tokens.size() && fb.tokens[k2] == tok) ++k2;
    bool mono = k2 == fb.tokens.size();
    bool strict = std::all_of(fa.tokens.begin(), fa.tokens.end(), [&](const auto& x) { return x.confidence > a; });
    if (subseq && idem && mono && strict) ++ok;
  }
  return {ok == n, fmt::format("{}/{} random transcripts satisfy all four properties", ok, n)};
}

// References are the fixture utterances; hypotheses are the same words with
// confident scores plus injected noise tokens scored below 0.2.
Outcome filter_improves_wer() {
  auto corpus = chat::parse_corpus(fixture("corpus"));
  std::mt19937 rng(2025);
  std::uniform_real_distribution<double> good(0.5, 1.0), noise(0.0, 0.19);
  std::uniform_int_distribution<int> coin(0, 2);
  static const std::vector<std::string> noise_words{"the", "uh", "night", "oh", "there"};
  std::vector<eval::WerItem> before_noise, after_noise, before_mixed, after_mixed;
  int idx = 0;
  for (const auto& f : corpus.files) {
    for (const auto& u : f.utterances) {
      auto ref = u.body_text();
      auto words = eval::normalize(ref);
      if (words.empty()) continue;
      asr::ScoredTranscript hyp, mixed;
      for (const auto& w : words.words) {
        if (coin(rng) == 0) hyp.tokens.push_back({noise_words[idx % noise_words.size()], noise(rng), {}});
        hyp.tokens.push_back({w, good(rng), {}});
      }
      hyp.tokens.push_back({"oh", noise(rng), {}});
      mixed = hyp;
      if (idx % 3 == 0) mixed.tokens.back() = {"night", good(rng), {}};  // a confident error survives
      auto id = fmt::format("u{}", idx++);
      before_noise.push_back({id, ref, hyp.text()});
      after_noise.push_back({id, ref, asr::filter_tokens(hyp, 0.2).text()});
      before_mixed.push_back({id, ref, mixed.text()});
      after_mixed.push_back({id, ref, asr::filter_tokens(mixed, 0.2).text()});
    }
  }
  double b = *eval::corpus_wer(before_noise).average_wer;
  double a = *eval::corpus_wer(after_noise).average_wer;
  double bm = *eval::corpus_wer(before_mixed).average_wer;
  double am = *eval::corpus_wer(after_mixed).average_wer;
  bool ok = a < b && a == 0.0 && am < bm;
  return {ok, fmt::format("noise only: {:.3f} -> {:.3f}; with confident errors: {:.3f} -> {:.3f} ({} items)", b, a,
                          bm, am, before_noise.size())};
}

Outcome case_study() {
  fusion::Clients c;
  c.asr = std::make_shared<clients::MockSpeechRecognizer>(
      clients::MockSpeechRecognizer::from_file(fixture("case_study/mock_asr.json")));
  c.gesture = std::make_shared<clients::MockGestureRecognizer>(
      clients::MockGestureRecognizer::from_file(fixture("case_study/mock_gesture.json")));
  c.rewriter = std::make_shared<clients::MockRewriter>();
  auto report = fusion::run_pipeline(fusion::load_manifest(fixture("case_study/manifest.jsonl")), c);
  const char* verbs[] = {"folding", "cutting", "eating"};
  int hits = 0;
  std::string shown;
  for (std::size_t i = 0; i < report.utterances.size() && i < 3; ++i) {
    const auto& u = report.utterances[i];
    if (u.final_text.find(verbs[i]) != std::string::npos && u.asr_text.find(verbs[i]) == std::string::npos) ++hits;
    shown += fmt::format("{}\"{}\"", shown.empty() ? "" : ", ", u.final_text);
  }
  return {hits == 3, fmt::format("{}/3 rows gain the gesture verb: {}", hits, shown)};
}

Outcome robustness() {
  auto cmd = fmt::format("\"{}\" --config \"{}\" --json pipeline --manifest \"{}\" > gasr_fault_report.json 2>/dev/null",
                         GASR_CLI, fixture("case_study/fault.conf").string(),
                         fixture("case_study/manifest.jsonl").string());
  int code = run_command(cmd);
  auto j = nlohmann::json::parse(read_file("gasr_fault_report.json"));
  std::remove("gasr_fault_report.json");
  auto ok_n = j["utterances"].size(), fail_n = j["failures"].size(), total = j["manifest_size"].get<std::size_t>();
  return {code == 1 && ok_n + fail_n == total && fail_n == 1,
          fmt::format("{} succeeded + {} failed = {} of {}, exit code {}", ok_n, fail_n, ok_n + fail_n, total, code)};
}

Outcome suite_runtime(Clock::time_point acceptance_start) {
  auto start = Clock::now();
  int code = run_command(fmt::format("\"{}\" > /dev/null 2>&1", GASR_UNIT_TESTS));
  double unit = seconds_since(start);
  double total = seconds_since(acceptance_start);
  return {code == 0 && total < 60.0,
          fmt::format("unit tests {} in {:.1f} s, whole offline suite {:.1f} s", code == 0 ? "passed" : "FAILED",
                      unit, total)};
}

}  // namespace

int main() {
  auto start = Clock::now();
  check("wer_oracle_equivalence", wer_oracle);
  check("wer_hand_computed", wer_hand);
  check("parser_round_trip", parser_roundtrip);
  check("stats_golden_and_weighted_mean", stats_golden);
  check("filter_properties", filter_properties);
  check("filter_improves_wer", filter_improves_wer);
  check("case_study_rows_2_to_4", case_study);
  check("pipeline_fault_injection", robustness);
  check("offline_suite_under_60s", [&] { return suite_runtime(start); });
  std::cout << (failures == 0 ? "all acceptance criteria met" : fmt::format("{} criterion(s) failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
