#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restyle/classifier.hpp"
#include "restyle/corpus.hpp"
#include "restyle/metrics.hpp"
#include "restyle/rewards.hpp"
#include "restyle/schedule.hpp"
#include "restyle/seq2seq.hpp"

namespace restyle {

struct TrainConfig {
  RewardConfig rewards;
  int batch_size = 16;
  double lr = 1e-3;
  double clip = 5.0;
};

struct EpochRecord {
  int phase = 0;         // 0-based
  int epoch = 0;         // 0-based within phase
  int epoch_global = 0;  // 0-based across phases
  LossMask mask;
  // epoch means; inactive terms are exactly 0
  double loss_ml = 0.0;
  double loss_cp = 0.0;
  double loss_ts = 0.0;
  double loss_combined = 0.0;
  double val_bleu = 0.0;
  double val_accuracy = 0.0;
  double val_overall = 0.0;
};

std::string mask_name(const LossMask& mask);

// Earliest index of the maximum score. At least one entry required.
int select_best(std::span<const double> scores);

// Writes the run directory: config.json, history.jsonl, per-epoch
// checkpoints and the `best` pointer file. All artifacts are
// timestamp-free, so reruns with the same config and seed are
// byte-identical.
class RunWriter {
 public:
  RunWriter(std::string dir, std::string config_json,
            std::uint64_t vocab_hash);

  void write_config() const;
  void append_history(const EpochRecord& record);
  void write_checkpoint(int phase, int epoch,
                        const std::vector<NamedTensor>& params) const;
  void write_best_pointer(int phase, int epoch) const;

  static std::string ckpt_name(int phase, int epoch);
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::string config_json_;
  std::uint64_t vocab_hash_;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_phase = 0;
  int best_epoch = 0;  // within the final phase
};

// Runs a named ablation schedule. Every phase after the first resumes from
// the best-validation checkpoint of the phase before it, and optimizer
// moments reset at phase boundaries. Validation selection uses the overall
// score when a classifier is available, else corpus BLEU (only pure-content
// schedules may omit the classifier; any ts phase without one is a
// ConfigError). On return the model holds the best parameters of the final
// phase.
TrainResult train_schedule(Seq2SeqModel& model, const StyleClassifier* clf,
                           const std::vector<ParallelPair>& train_pairs,
                           const std::vector<ParallelPair>& valid_pairs,
                           const std::string& schedule_name,
                           const TrainConfig& cfg, std::uint64_t seed,
                           RunWriter* writer = nullptr);

}  // namespace restyle
