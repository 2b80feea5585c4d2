#include "restyle/rewards.hpp"

#include <algorithm>

#include "restyle/bleu.hpp"
#include "restyle/errors.hpp"
#include "restyle/vocab.hpp"

namespace restyle {

namespace {

// ground-truth target content (strip <eos>, ignore pads)
std::vector<int> reference_content(const Batch& batch, int row) {
  const auto& tgt = batch.tgt[static_cast<std::size_t>(row)];
  int len = batch.tgt_len[static_cast<std::size_t>(row)];
  if (len > 0 && tgt[static_cast<std::size_t>(len - 1)] == kEosId) --len;
  return {tgt.begin(), tgt.begin() + len};
}

std::vector<int> hyp_content(const std::vector<int>& tokens) {
  std::vector<int> out = tokens;
  if (!out.empty() && out.back() == kEosId) out.pop_back();
  return out;
}

}  // namespace

CpDecodes decode_for_cp(const Seq2SeqModel& model, const Batch& batch,
                        std::uint64_t seed, int bleu_order) {
  const int max_len = model.config().max_decode_len;
  auto sampled =
      decode_sample_batch(model, batch.src, batch.src_len, max_len, seed);
  auto greedy = decode_greedy_batch(model, batch.src, batch.src_len, max_len);

  CpDecodes out;
  for (int b = 0; b < batch.size(); ++b) {
    std::vector<int> ref = reference_content(batch, b);
    out.sampled.push_back(sampled[static_cast<std::size_t>(b)].tokens);
    out.reward_sampled.push_back(sentence_bleu(
        hyp_content(sampled[static_cast<std::size_t>(b)].tokens), ref,
        bleu_order));
    out.reward_greedy.push_back(sentence_bleu(
        hyp_content(greedy[static_cast<std::size_t>(b)].tokens), ref,
        bleu_order));
  }
  return out;
}

Tensor loss_cp_pinned(const Seq2SeqModel& model, const Batch& batch,
                      const CpDecodes& decodes) {
  const int b = batch.size();
  if (static_cast<int>(decodes.sampled.size()) != b)
    throw ContractError("loss_cp: decode batch size mismatch");

  int tmax = 0;
  std::vector<int> lens(static_cast<std::size_t>(b));
  for (int r = 0; r < b; ++r) {
    lens[static_cast<std::size_t>(r)] =
        static_cast<int>(decodes.sampled[static_cast<std::size_t>(r)].size());
    tmax = std::max(tmax, lens[static_cast<std::size_t>(r)]);
  }
  std::vector<std::vector<int>> padded = decodes.sampled;
  for (auto& row : padded) row.resize(static_cast<std::size_t>(tmax), kPadId);

  EncoderStates enc = encode(model, batch);
  Tensor logp = sequence_log_prob(model, enc, padded, lens);

  std::vector<double> coeff(static_cast<std::size_t>(b));
  for (int r = 0; r < b; ++r)
    coeff[static_cast<std::size_t>(r)] =
        decodes.reward_greedy[static_cast<std::size_t>(r)] -
        decodes.reward_sampled[static_cast<std::size_t>(r)];
  Tensor weights = Tensor::from({b, 1}, std::move(coeff));
  return mean(mul(weights, logp));
}

Tensor loss_cp(const Seq2SeqModel& model, const Batch& batch,
               std::uint64_t seed, int bleu_order) {
  return loss_cp_pinned(model, batch,
                        decode_for_cp(model, batch, seed, bleu_order));
}

std::vector<std::vector<int>> greedy_paths(const Seq2SeqModel& model,
                                           const Batch& batch) {
  auto hyps = decode_greedy_batch(model, batch.src, batch.src_len,
                                  model.config().max_decode_len);
  std::vector<std::vector<int>> paths;
  paths.reserve(hyps.size());
  for (auto& h : hyps) paths.push_back(std::move(h.tokens));
  return paths;
}

Tensor ts_loss_from_score(const Tensor& score, Direction direction) {
  Tensor s = clamp(score, 1e-6, 1.0 - 1e-6);
  if (direction == Direction::LowToHigh) return sum(neg(log(s)));
  return sum(neg(log(affine(s, -1.0, 1.0))));
}

Tensor loss_ts_pinned(const Seq2SeqModel& model, const StyleClassifier& clf,
                      const Batch& batch,
                      const std::vector<std::vector<int>>& paths,
                      Direction direction) {
  const int b = batch.size();
  if (static_cast<int>(paths.size()) != b)
    throw ContractError("loss_ts: path batch size mismatch");
  const int vocab = model.config().vocab;

  // content steps: distributions for tokens before <eos>
  std::vector<int> content_len(static_cast<std::size_t>(b));
  int tmax = 0;
  for (int r = 0; r < b; ++r) {
    const auto& path = paths[static_cast<std::size_t>(r)];
    int len = static_cast<int>(path.size());
    if (len > 0 && path.back() == kEosId) --len;
    content_len[static_cast<std::size_t>(r)] = len;
    tmax = std::max(tmax, static_cast<int>(path.size()));
  }

  EncoderStates enc = encode(model, batch);
  Tensor hs = enc.final_h;
  Tensor cs = enc.final_c;
  std::vector<int> prev(static_cast<std::size_t>(b), kBosId);
  std::vector<std::vector<Tensor>> rows(static_cast<std::size_t>(b));
  for (int t = 0; t < tmax; ++t) {
    DecodeStep step = decode_step(model, enc, prev, hs, cs);
    for (int r = 0; r < b; ++r) {
      const auto& path = paths[static_cast<std::size_t>(r)];
      if (t < content_len[static_cast<std::size_t>(r)])
        rows[static_cast<std::size_t>(r)].push_back(
            slice_rows(step.p_mix, r, r + 1));
      prev[static_cast<std::size_t>(r)] =
          t < static_cast<int>(path.size())
              ? path[static_cast<std::size_t>(t)]
              : kPadId;
    }
    hs = step.h;
    cs = step.c;
  }

  Tensor total = Tensor::zeros({1});
  for (int r = 0; r < b; ++r) {
    Tensor probs;
    if (rows[static_cast<std::size_t>(r)].empty()) {
      // empty decode: score an all-<pad> input (constant, no gradient)
      std::vector<double> pad(static_cast<std::size_t>(vocab), 0.0);
      pad[kPadId] = 1.0;
      std::vector<double> data;
      for (int i = 0; i < 5; ++i) data.insert(data.end(), pad.begin(), pad.end());
      probs = Tensor::from({5, vocab}, std::move(data));
    } else {
      probs = concat_rows(rows[static_cast<std::size_t>(r)]);
    }
    Tensor s = clf.score_soft(probs);
    total = add(total, ts_loss_from_score(s, direction));
  }
  return affine(total, 1.0 / static_cast<double>(b), 0.0);
}

Tensor loss_ts(const Seq2SeqModel& model, const StyleClassifier& clf,
               const Batch& batch, Direction direction) {
  return loss_ts_pinned(model, clf, batch, greedy_paths(model, batch),
                        direction);
}

Tensor combined_loss(const RewardConfig& cfg, const std::optional<Tensor>& ml,
                     const std::optional<Tensor>& cp,
                     const std::optional<Tensor>& ts, const LossMask& mask) {
  Tensor total = Tensor::zeros({1});
  auto fold = [&total](const std::optional<Tensor>& term, double weight,
                       const char* name) {
    if (!term.has_value())
      throw ContractError(std::string("combined_loss: mask activates ") +
                          name + " but no term was supplied");
    total = add(total, affine(sum(*term), weight, 0.0));
  };
  if (mask.ml) fold(ml, cfg.alpha, "L_ml");
  if (mask.cp) fold(cp, cfg.beta, "L_cp");
  if (mask.ts) fold(ts, cfg.gamma, "L_ts");
  return total;
}

}  // namespace restyle
