// Serial reference vs OpenMP kernel for corpus WER, gesture statistics and corpus parsing.
// Thread count follows OMP_NUM_THREADS.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "gesture_asr/asr_eval.hpp"
#include "gesture_asr/chat.hpp"
#include "gesture_asr/gesture_stats.hpp"

using namespace gesture_asr;

namespace {

std::string random_sentence(std::mt19937& rng, int words) {
  static const char* vocab[] = {"i", "cut", "the", "bread", "now", "spread", "peanut", "butter", "on", "it",
                                "fold", "eat", "open", "jar", "and", "then"};
  std::uniform_int_distribution<int> pick(0, 15);
  std::string s;
  for (int i = 0; i < words; ++i) s += (i ? " " : "") + std::string(vocab[pick(rng)]);
  return s;
}

const std::vector<eval::WerItem>& wer_items() {
  static const auto items = [] {
    std::mt19937 rng(1);
    std::vector<eval::WerItem> v;
    for (int k = 0; k < 4000; ++k)
      v.push_back({"u" + std::to_string(k), random_sentence(rng, 30), random_sentence(rng, 30)});
    return v;
  }();
  return items;
}

// The fixture corpus replicated so the per-file work dominates.
const chat::Corpus& big_corpus() {
  static const auto corpus = [] {
    auto base = chat::parse_corpus(GASR_FIXTURES "/corpus");
    chat::Corpus c;
    for (int k = 0; k < 400; ++k) c.files.insert(c.files.end(), base.files.begin(), base.files.end());
    return c;
  }();
  return corpus;
}

void BM_CorpusWerSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(eval::corpus_wer_serial(wer_items()));
}
void BM_CorpusWerParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(eval::corpus_wer(wer_items()));
}
void BM_StatsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stats::compute_stats_serial(big_corpus()));
}
void BM_StatsParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stats::compute_stats(big_corpus()));
}
void BM_ParseCorpus(benchmark::State& state) {
  chat::CorpusOptions opt;
  opt.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(chat::parse_corpus(GASR_FIXTURES "/corpus", opt));
  state.SetLabel(opt.parallel ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_CorpusWerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorpusWerParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StatsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StatsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParseCorpus)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
