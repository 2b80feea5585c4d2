#include "restyle/seq2seq.hpp"

#include <algorithm>
#include <cmath>

#include "restyle/errors.hpp"
#include "restyle/rng.hpp"

namespace restyle {

namespace {

Tensor init_uniform(std::vector<int> shape, Rng& rng, double scale = 0.08) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(data), true);
}

// LSTM gate layout in the fused weight matrix: [input, forget, cell, output].
struct LstmOut {
  Tensor h, c;
};

LstmOut lstm_step(const Tensor& x, const Tensor& h, const Tensor& c,
                  const Tensor& w, const Tensor& b, int hidden) {
  Tensor z = concat_cols({x, h});
  Tensor gates = add_bias(matmul(z, w), b);
  Tensor i = sigmoid(slice_cols(gates, 0, hidden));
  Tensor f = sigmoid(slice_cols(gates, hidden, 2 * hidden));
  Tensor g = tanh(slice_cols(gates, 2 * hidden, 3 * hidden));
  Tensor o = sigmoid(slice_cols(gates, 3 * hidden, 4 * hidden));
  Tensor c_new = add(mul(f, c), mul(i, g));
  Tensor h_new = mul(o, tanh(c_new));
  return {h_new, c_new};
}

std::vector<int> column(const std::vector<std::vector<int>>& rows, int t) {
  std::vector<int> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[r] = rows[r][static_cast<std::size_t>(t)];
  return out;
}

Tensor step_mask(const std::vector<int>& lengths, int t) {
  std::vector<double> m(lengths.size());
  for (std::size_t r = 0; r < lengths.size(); ++r)
    m[r] = t < lengths[r] ? 1.0 : 0.0;
  return Tensor::from({static_cast<int>(lengths.size()), 1}, std::move(m));
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  if (cfg.vocab < 4) throw ConfigError("Seq2SeqModel: vocab too small");
  if (cfg.emb < 1 || cfg.hidden < 1 || cfg.max_decode_len < 1)
    throw ConfigError("Seq2SeqModel: non-positive dimension");
  Rng rng(split_seed(seed, "seq2seq-init"));
  const int v = cfg.vocab, e = cfg.emb, h = cfg.hidden;
  src_emb = init_uniform({v, e}, rng);
  tgt_emb = init_uniform({v, e}, rng);
  enc_w = init_uniform({e + h, 4 * h}, rng);
  enc_b = init_uniform({1, 4 * h}, rng);
  dec_w = init_uniform({e + h, 4 * h}, rng);
  dec_b = init_uniform({1, 4 * h}, rng);
  attn_w = init_uniform({h, h}, rng);
  out_w = init_uniform({2 * h, v}, rng);
  out_b = init_uniform({1, v}, rng);
  gate_w = init_uniform({2 * h + e, 1}, rng);
  gate_b = init_uniform({1, 1}, rng);
  // forget-gate bias starts positive so early training does not wash out
  // the cell state
  for (int j = h; j < 2 * h; ++j) {
    enc_b.data()[static_cast<std::size_t>(j)] += 1.0;
    dec_b.data()[static_cast<std::size_t>(j)] += 1.0;
  }
}

std::vector<NamedTensor> Seq2SeqModel::parameters() {
  return {{"src_emb", src_emb}, {"tgt_emb", tgt_emb}, {"enc_w", enc_w},
          {"enc_b", enc_b},     {"dec_w", dec_w},     {"dec_b", dec_b},
          {"attn_w", attn_w},   {"out_w", out_w},     {"out_b", out_b},
          {"gate_w", gate_w},   {"gate_b", gate_b}};
}

std::vector<NamedTensor> Seq2SeqModel::parameters() const {
  return const_cast<Seq2SeqModel*>(this)->parameters();
}

void Seq2SeqModel::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

EncoderStates encode(const Seq2SeqModel& model,
                     const std::vector<std::vector<int>>& src,
                     const std::vector<int>& src_len) {
  if (src.empty()) throw ContractError("encode: empty batch");
  const int b = static_cast<int>(src.size());
  const int l = static_cast<int>(src[0].size());
  const int h = model.config().hidden;
  const int v = model.config().vocab;
  for (const auto& row : src) {
    if (static_cast<int>(row.size()) != l)
      throw ShapeError("encode: ragged source batch");
    for (int id : row)
      if (id < 0 || id >= v)
        throw ContractError("encode: token id " + std::to_string(id) +
                            " out of vocab " + std::to_string(v));
  }

  Tensor hs = Tensor::zeros({b, h});
  Tensor cs = Tensor::zeros({b, h});
  std::vector<Tensor> steps;
  steps.reserve(static_cast<std::size_t>(l));
  for (int t = 0; t < l; ++t) {
    Tensor emb = embed(model.src_emb, column(src, t));
    LstmOut out = lstm_step(emb, hs, cs, model.enc_w, model.enc_b, h);
    // freeze rows that ran past their sentence length
    Tensor m = step_mask(src_len, t);
    Tensor keep = affine(m, -1.0, 1.0);
    hs = add(scale_rows(out.h, m), scale_rows(hs, keep));
    cs = add(scale_rows(out.c, m), scale_rows(cs, keep));
    steps.push_back(hs);
  }

  EncoderStates enc;
  enc.states = stack_timesteps(steps);
  enc.final_h = hs;
  enc.final_c = cs;
  enc.src_len = src_len;
  // Attention pads get -1e9 (softmax weight ~0); the copy scatter remaps pad
  // slots to the row's first real token so no probability mass can land on
  // ids outside the actual source sentence.
  std::vector<double> mask(static_cast<std::size_t>(b) * l, 0.0);
  enc.scatter_ids = src;
  for (int r = 0; r < b; ++r) {
    for (int t = src_len[static_cast<std::size_t>(r)]; t < l; ++t) {
      mask[static_cast<std::size_t>(r) * l + t] = -1e9;
      enc.scatter_ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] =
          src[static_cast<std::size_t>(r)][0];
    }
  }
  enc.attn_mask = Tensor::from({b, l}, std::move(mask));
  return enc;
}

EncoderStates encode(const Seq2SeqModel& model, const Batch& batch) {
  return encode(model, batch.src, batch.src_len);
}

DecodeStep decode_step(const Seq2SeqModel& model, const EncoderStates& enc,
                       std::span<const int> prev_tokens, const Tensor& prev_h,
                       const Tensor& prev_c, const DecodeOptions& opts) {
  const int h = model.config().hidden;
  const int v = model.config().vocab;
  const int b = prev_h.dim(0);

  Tensor prev_emb = embed(model.tgt_emb, prev_tokens);
  LstmOut out = lstm_step(prev_emb, prev_h, prev_c, model.dec_w, model.dec_b, h);

  Tensor q = matmul(out.h, model.attn_w);
  Tensor scores = add(bmm_qk(q, enc.states), enc.attn_mask);
  Tensor attn = softmax(scores, 1);
  Tensor context = bmm_av(attn, enc.states);

  Tensor feat = concat_cols({context, out.h});
  Tensor p_rnn = softmax(add_bias(matmul(feat, model.out_w), model.out_b), 1);

  Tensor delta;
  if (opts.force_delta.has_value()) {
    delta = Tensor::full({b, 1}, *opts.force_delta);
  } else {
    Tensor gin = concat_cols({context, out.h, prev_emb});
    delta = sigmoid(add_bias(matmul(gin, model.gate_w), model.gate_b));
  }

  Tensor p_copy = scatter_rows(attn, enc.scatter_ids, v);
  Tensor p_mix = add(scale_rows(p_rnn, delta),
                     scale_rows(p_copy, affine(delta, -1.0, 1.0)));

  return DecodeStep{out.h, out.c, attn, context, p_rnn, attn, delta, p_mix};
}

Tensor sequence_log_prob(const Seq2SeqModel& model, const EncoderStates& enc,
                         const std::vector<std::vector<int>>& targets,
                         const std::vector<int>& tgt_len,
                         const DecodeOptions& opts) {
  const int b = static_cast<int>(targets.size());
  if (b == 0) throw ContractError("sequence_log_prob: empty batch");
  const int tmax = static_cast<int>(targets[0].size());
  for (const auto& row : targets)
    if (static_cast<int>(row.size()) != tmax)
      throw ShapeError("sequence_log_prob: ragged target batch");

  Tensor lp_sum = Tensor::zeros({b, 1});
  Tensor hs = enc.final_h;
  Tensor cs = enc.final_c;
  std::vector<int> prev(static_cast<std::size_t>(b), kBosId);
  for (int t = 0; t < tmax; ++t) {
    DecodeStep step = decode_step(model, enc, prev, hs, cs, opts);
    std::vector<int> ids = column(targets, t);
    Tensor lp = log(gather_cols(step.p_mix, ids));
    lp_sum = add(lp_sum, mul(lp, step_mask(tgt_len, t)));
    prev = std::move(ids);
    hs = step.h;
    cs = step.c;
  }
  return lp_sum;
}

Tensor loss_ml(const Seq2SeqModel& model, const Batch& batch,
               const DecodeOptions& opts) {
  EncoderStates enc = encode(model, batch);
  Tensor lp = sequence_log_prob(model, enc, batch.tgt, batch.tgt_len, opts);
  return neg(mean(lp));
}

std::vector<int> Hypothesis::content() const {
  std::vector<int> out = tokens;
  if (!out.empty() && out.back() == kEosId) out.pop_back();
  return out;
}

namespace {

// Shared batched decoding loop; `choose` picks a token id from one row of
// the mixture distribution.
template <typename ChooseFn>
std::vector<Hypothesis> decode_batch_impl(
    const Seq2SeqModel& model, const std::vector<std::vector<int>>& src,
    const std::vector<int>& src_len, int max_len, const DecodeOptions& opts,
    ChooseFn&& choose) {
  NoGradGuard no_grad;
  const int b = static_cast<int>(src.size());
  EncoderStates enc = encode(model, src, src_len);
  Tensor hs = enc.final_h;
  Tensor cs = enc.final_c;
  std::vector<int> prev(static_cast<std::size_t>(b), kBosId);
  std::vector<bool> alive(static_cast<std::size_t>(b), true);
  std::vector<Hypothesis> hyps(static_cast<std::size_t>(b));

  for (int t = 0; t < max_len; ++t) {
    bool any = false;
    for (bool a : alive) any = any || a;
    if (!any) break;
    DecodeStep step = decode_step(model, enc, prev, hs, cs, opts);
    const int v = step.p_mix.dim(1);
    for (int r = 0; r < b; ++r) {
      if (!alive[static_cast<std::size_t>(r)]) {
        prev[static_cast<std::size_t>(r)] = kPadId;
        continue;
      }
      std::span<const double> row =
          step.p_mix.data().subspan(static_cast<std::size_t>(r) * v,
                                    static_cast<std::size_t>(v));
      int tok = choose(row, r);
      auto& hyp = hyps[static_cast<std::size_t>(r)];
      hyp.tokens.push_back(tok);
      double lp = std::log(row[static_cast<std::size_t>(tok)]);
      hyp.step_logp.push_back(lp);
      hyp.total_logp += lp;
      if (tok == kEosId) alive[static_cast<std::size_t>(r)] = false;
      prev[static_cast<std::size_t>(r)] = tok;
    }
    hs = step.h;
    cs = step.c;
  }
  return hyps;
}

int argmax_lowest_id(std::span<const double> row) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(row.size()); ++j)
    if (row[static_cast<std::size_t>(j)] > row[static_cast<std::size_t>(best)])
      best = j;
  return best;
}

}  // namespace

std::vector<Hypothesis> decode_greedy_batch(
    const Seq2SeqModel& model, const std::vector<std::vector<int>>& src,
    const std::vector<int>& src_len, int max_len, const DecodeOptions& opts) {
  return decode_batch_impl(model, src, src_len, max_len, opts,
                           [](std::span<const double> row, int) {
                             return argmax_lowest_id(row);
                           });
}

std::vector<Hypothesis> decode_sample_batch(
    const Seq2SeqModel& model, const std::vector<std::vector<int>>& src,
    const std::vector<int>& src_len, int max_len, std::uint64_t seed,
    const DecodeOptions& opts) {
  Rng rng(seed);
  return decode_batch_impl(model, src, src_len, max_len, opts,
                           [&rng](std::span<const double> row, int) {
                             return rng.multinomial(row);
                           });
}

Hypothesis decode_greedy(const Seq2SeqModel& model,
                         std::span<const int> source, int max_len,
                         const DecodeOptions& opts) {
  std::vector<std::vector<int>> src{{source.begin(), source.end()}};
  std::vector<int> len{static_cast<int>(source.size())};
  return decode_greedy_batch(model, src, len, max_len, opts)[0];
}

Hypothesis decode_sample(const Seq2SeqModel& model,
                         std::span<const int> source, int max_len,
                         std::uint64_t seed, const DecodeOptions& opts) {
  std::vector<std::vector<int>> src{{source.begin(), source.end()}};
  std::vector<int> len{static_cast<int>(source.size())};
  return decode_sample_batch(model, src, len, max_len, seed, opts)[0];
}

}  // namespace restyle
