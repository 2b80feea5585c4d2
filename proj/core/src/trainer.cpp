#include "restyle/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "restyle/checkpoint.hpp"
#include "restyle/errors.hpp"
#include "restyle/optimizer.hpp"
#include "restyle/rng.hpp"

namespace restyle {

std::string mask_name(const LossMask& mask) {
  std::string name;
  if (mask.ml) name += "ml";
  if (mask.cp) name += name.empty() ? "cp" : "+cp";
  if (mask.ts) name += name.empty() ? "ts" : "+ts";
  return name.empty() ? "none" : name;
}

int select_best(std::span<const double> scores) {
  if (scores.empty()) throw ContractError("select_best: no scores");
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[static_cast<std::size_t>(i)] >
        scores[static_cast<std::size_t>(best)])
      best = i;
  return best;
}

RunWriter::RunWriter(std::string dir, std::string config_json,
                     std::uint64_t vocab_hash)
    : dir_(std::move(dir)),
      config_json_(std::move(config_json)),
      vocab_hash_(vocab_hash) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("run dir: cannot create " + dir_ + ": " + ec.message());
}

void RunWriter::write_config() const {
  std::ofstream os(dir_ + "/config.json");
  if (!os) throw IoError("run dir: cannot write " + dir_ + "/config.json");
  os << config_json_;
  if (!config_json_.empty() && config_json_.back() != '\n') os << '\n';
}

void RunWriter::append_history(const EpochRecord& r) {
  std::ofstream os(dir_ + "/history.jsonl", std::ios::app);
  if (!os) throw IoError("run dir: cannot append " + dir_ + "/history.jsonl");
  nlohmann::ordered_json j{{"phase", r.phase},
                   {"epoch", r.epoch},
                   {"epoch_global", r.epoch_global},
                   {"mask", mask_name(r.mask)},
                   {"loss_ml", r.loss_ml},
                   {"loss_cp", r.loss_cp},
                   {"loss_ts", r.loss_ts},
                   {"loss_combined", r.loss_combined},
                   {"val_bleu", r.val_bleu},
                   {"val_accuracy", r.val_accuracy},
                   {"val_overall", r.val_overall}};
  os << j.dump() << '\n';
}

std::string RunWriter::ckpt_name(int phase, int epoch) {
  return "ckpt-" + std::to_string(phase) + "-" + std::to_string(epoch);
}

void RunWriter::write_checkpoint(int phase, int epoch,
                                 const std::vector<NamedTensor>& params) const {
  save_checkpoint(dir_ + "/" + ckpt_name(phase, epoch), params, vocab_hash_,
                  config_json_);
}

void RunWriter::write_best_pointer(int phase, int epoch) const {
  std::ofstream os(dir_ + "/best");
  if (!os) throw IoError("run dir: cannot write " + dir_ + "/best");
  os << ckpt_name(phase, epoch) << '\n';
}

TrainResult train_schedule(Seq2SeqModel& model, const StyleClassifier* clf,
                           const std::vector<ParallelPair>& train_pairs,
                           const std::vector<ParallelPair>& valid_pairs,
                           const std::string& schedule_name,
                           const TrainConfig& cfg, std::uint64_t seed,
                           RunWriter* writer) {
  const std::vector<Phase> phases = schedule_phases(schedule_name);
  for (const auto& phase : phases) {
    if (phase.mask.ts && clf == nullptr)
      throw ConfigError("train: schedule '" + schedule_name +
                        "' has a transfer-strength phase but no trained "
                        "classifier was provided");
  }
  if (train_pairs.empty()) throw InputError("train: empty training set");
  if (valid_pairs.empty()) throw InputError("train: empty validation set");

  Adam optimizer(model.parameters(), cfg.lr, cfg.clip);
  const Direction dir = cfg.rewards.direction;

  if (writer) writer->write_config();

  TrainResult result;
  int epoch_global = 0;

  for (int pi = 0; pi < static_cast<int>(phases.size()); ++pi) {
    const Phase& phase = phases[static_cast<std::size_t>(pi)];
    optimizer.reset();

    std::vector<double> selection_scores;
    std::vector<std::vector<std::vector<double>>> epoch_snapshots;

    for (int ei = 0; ei < phase.epochs; ++ei) {
      const std::string tag = "shuffle-p" + std::to_string(pi) + "-e" +
                              std::to_string(ei);
      auto batches =
          make_batches(train_pairs, cfg.batch_size, split_seed(seed, tag));

      double sum_ml = 0.0, sum_cp = 0.0, sum_ts = 0.0, sum_combined = 0.0;
      for (std::size_t bi = 0; bi < batches.size(); ++bi) {
        const Batch& batch = batches[bi];
        std::optional<Tensor> l_ml, l_cp, l_ts;
        if (phase.mask.ml) l_ml = loss_ml(model, batch);
        if (phase.mask.cp) {
          const std::string stag = "sample-p" + std::to_string(pi) + "-e" +
                                   std::to_string(ei) + "-b" +
                                   std::to_string(bi);
          l_cp = loss_cp(model, batch, split_seed(seed, stag),
                         cfg.rewards.bleu_order);
        }
        if (phase.mask.ts) l_ts = loss_ts(model, *clf, batch, dir);

        Tensor combined = combined_loss(cfg.rewards, l_ml, l_cp, l_ts,
                                        phase.mask);
        combined.backward();
        optimizer.step();

        if (l_ml) sum_ml += l_ml->item();
        if (l_cp) sum_cp += l_cp->item();
        if (l_ts) sum_ts += l_ts->item();
        sum_combined += combined.item();
      }
      const double nb = static_cast<double>(batches.size());

      EpochRecord record;
      record.phase = pi;
      record.epoch = ei;
      record.epoch_global = epoch_global++;
      record.mask = phase.mask;
      record.loss_ml = phase.mask.ml ? sum_ml / nb : 0.0;
      record.loss_cp = phase.mask.cp ? sum_cp / nb : 0.0;
      record.loss_ts = phase.mask.ts ? sum_ts / nb : 0.0;
      record.loss_combined = sum_combined / nb;

      if (clf) {
        MetricsReport val = evaluate(model, *clf, valid_pairs, dir, "val");
        record.val_bleu = val.bleu;
        record.val_accuracy = val.accuracy;
        record.val_overall = val.overall;
        selection_scores.push_back(val.overall);
      } else {
        record.val_bleu = corpus_bleu_of_model(model, valid_pairs,
                                               cfg.rewards.bleu_order);
        record.val_accuracy = 0.0;
        record.val_overall = 0.0;
        selection_scores.push_back(record.val_bleu);
      }

      epoch_snapshots.push_back(snapshot_params(model.parameters()));
      result.history.push_back(record);
      if (writer) {
        writer->append_history(record);
        writer->write_checkpoint(pi, ei, model.parameters());
      }
    }

    const int best = select_best(selection_scores);
    restore_params(model.parameters(),
                   epoch_snapshots[static_cast<std::size_t>(best)]);
    result.best_phase = pi;
    result.best_epoch = best;
  }

  if (writer) writer->write_best_pointer(result.best_phase, result.best_epoch);
  return result;
}

}  // namespace restyle
