#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restyle/corpus.hpp"
#include "restyle/tensor.hpp"

namespace restyle {

// Copy-enriched attention encoder-decoder. A single-layer LSTM encodes the
// source; at each decoder step a bilinear attention over the encoder states
// yields a context vector, the vocabulary head produces P_rnn, the pointer
// head reuses the attention weights as a distribution over source positions,
// and a learned gate delta in [0,1] blends the two:
//
//   P(w) = delta * P_rnn(w) + (1 - delta) * P_ptr(w)
//
// where P_ptr mass is scattered onto the vocabulary ids of the source tokens
// (duplicates accumulate).

struct Seq2SeqConfig {
  int vocab = 0;
  int emb = 32;
  int hidden = 64;
  int max_decode_len = 20;
};

class Seq2SeqModel {
 public:
  Seq2SeqModel(const Seq2SeqConfig& cfg, std::uint64_t seed);

  const Seq2SeqConfig& config() const { return cfg_; }

  // Shared handles onto the parameter tensors, in a fixed order.
  std::vector<NamedTensor> parameters();
  std::vector<NamedTensor> parameters() const;
  void zero_grad();

  Tensor src_emb, tgt_emb;  // [V,E]
  Tensor enc_w, enc_b;      // fused LSTM gates [E+H,4H], [1,4H]
  Tensor dec_w, dec_b;
  Tensor attn_w;            // bilinear attention [H,H]
  Tensor out_w, out_b;      // vocabulary head [2H,V], [1,V]
  Tensor gate_w, gate_b;    // mixture gate [2H+E,1], [1,1]

 private:
  Seq2SeqConfig cfg_;
};

// Per-position encoder outputs plus everything attention and the copy head
// need about the source batch.
struct EncoderStates {
  Tensor states;   // [B,L,H]
  Tensor final_h;  // [B,H], each row frozen at its sentence's last step
  Tensor final_c;
  std::vector<std::vector<int>> scatter_ids;  // [B][L], pads remapped
  std::vector<int> src_len;
  Tensor attn_mask;  // [B,L] constant, 0 at valid positions, -1e9 at pads
};

struct DecodeOptions {
  // Pins the mixture gate to a constant (copy-only at 0, vocab-only at 1).
  std::optional<double> force_delta;
};

// One decoder step over a batch. Row-wise invariants: attn, p_rnn, p_ptr and
// p_mix each sum to 1 (within 1e-9); delta lies in [0,1].
struct DecodeStep {
  Tensor h, c;      // [B,H]
  Tensor attn;      // [B,L]
  Tensor context;   // [B,H]
  Tensor p_rnn;     // [B,V]
  Tensor p_ptr;     // [B,L], distribution over source positions
  Tensor delta;     // [B,1]
  Tensor p_mix;     // [B,V]
};

EncoderStates encode(const Seq2SeqModel& model,
                     const std::vector<std::vector<int>>& src,
                     const std::vector<int>& src_len);
EncoderStates encode(const Seq2SeqModel& model, const Batch& batch);

DecodeStep decode_step(const Seq2SeqModel& model, const EncoderStates& enc,
                       std::span<const int> prev_tokens, const Tensor& prev_h,
                       const Tensor& prev_c, const DecodeOptions& opts = {});

// Teacher-forced sum of log P(target_t) per sentence -> [B,1]. Pad steps
// contribute exactly 0. Shared by the cross-entropy loss and the pinned
// REINFORCE scoring of sampled sequences.
Tensor sequence_log_prob(const Seq2SeqModel& model, const EncoderStates& enc,
                         const std::vector<std::vector<int>>& targets,
                         const std::vector<int>& tgt_len,
                         const DecodeOptions& opts = {});

// Mean over the batch of the per-sentence negative log-likelihood sums.
Tensor loss_ml(const Seq2SeqModel& model, const Batch& batch,
               const DecodeOptions& opts = {});

struct Hypothesis {
  std::vector<int> tokens;  // as generated; ends with <eos> unless cut off
  std::vector<double> step_logp;
  double total_logp = 0.0;

  // tokens with the trailing <eos> stripped
  std::vector<int> content() const;
};

// Greedy argmax decoding; ties break toward the lowest token id. Pure and
// deterministic. No graph is recorded.
Hypothesis decode_greedy(const Seq2SeqModel& model, std::span<const int> source,
                         int max_len, const DecodeOptions& opts = {});
std::vector<Hypothesis> decode_greedy_batch(
    const Seq2SeqModel& model, const std::vector<std::vector<int>>& src,
    const std::vector<int>& src_len, int max_len,
    const DecodeOptions& opts = {});

// Multinomial sampling from the mixture distribution, deterministic per seed.
Hypothesis decode_sample(const Seq2SeqModel& model, std::span<const int> source,
                         int max_len, std::uint64_t seed,
                         const DecodeOptions& opts = {});
std::vector<Hypothesis> decode_sample_batch(
    const Seq2SeqModel& model, const std::vector<std::vector<int>>& src,
    const std::vector<int>& src_len, int max_len, std::uint64_t seed,
    const DecodeOptions& opts = {});

}  // namespace restyle
