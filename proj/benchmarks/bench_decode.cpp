#include <benchmark/benchmark.h>

#include "restyle/corpus.hpp"
#include "restyle/seq2seq.hpp"
#include "restyle/synthetic.hpp"
#include "restyle/vocab.hpp"

using namespace restyle;

namespace {

struct DecodeSetup {
  Vocabulary vocab;
  Seq2SeqModel model;
  std::vector<std::vector<int>> src;
  std::vector<int> len;
  Batch batch;
};

DecodeSetup make_setup(int batch_size) {
  auto raw = gen_synthetic_corpus(9, batch_size);
  std::vector<std::vector<std::string>> all;
  for (auto& [lo, hi] : raw) {
    all.push_back(lo);
    all.push_back(hi);
  }
  Vocabulary vocab = Vocabulary::build(all, 1);
  auto pairs = encode_pairs(raw, vocab, 20, Direction::LowToHigh);
  DecodeSetup s{vocab, Seq2SeqModel({vocab.size(), 32, 64, 20}, 3), {}, {}, {}};
  int ml = 0;
  for (auto& p : pairs) ml = std::max(ml, static_cast<int>(p.src.size()));
  for (auto& p : pairs) {
    s.len.push_back(static_cast<int>(p.src.size()));
    auto row = p.src;
    row.resize(static_cast<std::size_t>(ml), kPadId);
    s.src.push_back(row);
  }
  s.batch = make_batches(pairs, batch_size, 1)[0];
  return s;
}

void BM_GreedyDecodeBatch(benchmark::State& state) {
  DecodeSetup s = make_setup(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto hyps = decode_greedy_batch(s.model, s.src, s.len, 20);
    benchmark::DoNotOptimize(hyps.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GreedyDecodeBatch)->Arg(1)->Arg(16)->Arg(32);

void BM_TeacherForcedLoss(benchmark::State& state) {
  DecodeSetup s = make_setup(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Tensor loss = loss_ml(s.model, s.batch);
    loss.backward();
    s.model.zero_grad();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TeacherForcedLoss)->Arg(16)->Arg(32);

}  // namespace
