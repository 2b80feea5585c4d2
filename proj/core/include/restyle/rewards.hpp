#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "restyle/classifier.hpp"
#include "restyle/schedule.hpp"
#include "restyle/seq2seq.hpp"

namespace restyle {

// Loss weights and reward settings for the combined objective
//   Loss = alpha * L_ml + beta * L_cp + gamma * L_ts.
struct RewardConfig {
  double alpha = 1.0;
  double beta = 0.125;
  double gamma = 1.0;
  Direction direction = Direction::LowToHigh;
  int bleu_order = 4;
};

// Self-critical decodes for L_cp, produced without graph recording and then
// held fixed ("pinned") while the differentiable part is evaluated. The
// reward r(y) is the sentence BLEU of y against the ground-truth target; the
// greedy decode y' serves as the baseline.
struct CpDecodes {
  std::vector<std::vector<int>> sampled;  // y^s token rows, as generated
  std::vector<double> reward_sampled;     // r(y^s)
  std::vector<double> reward_greedy;      // r(y')
};

CpDecodes decode_for_cp(const Seq2SeqModel& model, const Batch& batch,
                        std::uint64_t seed, int bleu_order = 4);

// L_cp = mean_b (r(y') - r(y^s)) * sum_t log p(y^s_t | y^s_<t, x).
// Rewards are constants; gradients flow only through the log-likelihood of
// the pinned sampled sequences.
Tensor loss_cp_pinned(const Seq2SeqModel& model, const Batch& batch,
                      const CpDecodes& decodes);
Tensor loss_cp(const Seq2SeqModel& model, const Batch& batch,
               std::uint64_t seed, int bleu_order = 4);

// Greedy decoder paths used by the transfer-strength loss.
std::vector<std::vector<int>> greedy_paths(const Seq2SeqModel& model,
                                           const Batch& batch);

// Direction-dependent transfer-strength term on a classifier score s:
//   high->low: -log(1 - s);  low->high: -log(s)
// with s clamped to [1e-6, 1-1e-6] first. Returns shape {1}.
Tensor ts_loss_from_score(const Tensor& score, Direction direction);

// L_ts over a batch: the decoder's step distributions along the (pinned)
// greedy path feed the classifier's soft scorer, so the loss is
// differentiable end to end; metric reporting keeps using the hard score.
Tensor loss_ts_pinned(const Seq2SeqModel& model, const StyleClassifier& clf,
                      const Batch& batch,
                      const std::vector<std::vector<int>>& paths,
                      Direction direction);
Tensor loss_ts(const Seq2SeqModel& model, const StyleClassifier& clf,
               const Batch& batch, Direction direction);

// Weighted sum of the active terms; inactive terms contribute exactly 0 and
// must not be computed by the caller. Throws ContractError when a term the
// mask activates is missing.
Tensor combined_loss(const RewardConfig& cfg, const std::optional<Tensor>& ml,
                     const std::optional<Tensor>& cp,
                     const std::optional<Tensor>& ts, const LossMask& mask);

}  // namespace restyle
