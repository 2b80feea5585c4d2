#include <benchmark/benchmark.h>

#include "restyle/bleu.hpp"
#include "restyle/rng.hpp"

using namespace restyle;

namespace {

std::vector<std::vector<int>> random_corpus(int n, int max_len, Rng& rng) {
  std::vector<std::vector<int>> corpus;
  for (int i = 0; i < n; ++i) {
    int len = 1 + rng.uniform_int(max_len);
    std::vector<int> seq(static_cast<std::size_t>(len));
    for (auto& t : seq) t = rng.uniform_int(80);
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

void BM_SentenceBleu(benchmark::State& state) {
  Rng rng(4);
  auto cands = random_corpus(256, 18, rng);
  auto refs = random_corpus(256, 18, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sentence_bleu(cands[i % 256], refs[i % 256]));
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SentenceBleu);

void BM_CorpusBleu(benchmark::State& state) {
  Rng rng(5);
  auto cands = random_corpus(200, 18, rng);
  auto refs = random_corpus(200, 18, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(corpus_bleu(cands, refs));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_CorpusBleu);

}  // namespace
