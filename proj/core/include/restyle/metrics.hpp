#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "restyle/classifier.hpp"
#include "restyle/corpus.hpp"
#include "restyle/seq2seq.hpp"

namespace restyle {

// Overall = (BLEU * Accuracy) / (BLEU + Accuracy); 0 when both are 0.
// Inputs outside [0,1] are a contract violation.
double overall_score(double bleu, double accuracy);

struct SentenceDiag {
  std::vector<int> output;  // decoded content tokens
  double sbleu = 0.0;       // sentence BLEU vs reference
  double style_score = 0.0;
  bool in_target = false;
};

struct MetricsReport {
  std::string model;
  Direction direction = Direction::LowToHigh;
  double bleu = 0.0;
  double accuracy = 0.0;
  double overall = 0.0;
  std::vector<SentenceDiag> sentences;
};

// Generic evaluation over already-oriented pairs: decode maps a source id
// sequence (with <eos>) to output content tokens; score maps content tokens
// to a style likelihood. Kept pluggable so degenerate stand-ins can exercise
// the protocol in tests.
using DecodeFn =
    std::function<std::vector<int>(const std::vector<int>& source)>;
using ScoreFn = std::function<double(const std::vector<int>& content)>;

MetricsReport evaluate(const DecodeFn& decode, const ScoreFn& score,
                       const std::vector<ParallelPair>& pairs,
                       Direction direction, std::string model_name,
                       int bleu_order = 4);

// Production path: batched greedy decoding plus the hard classifier score.
MetricsReport evaluate(const Seq2SeqModel& model, const StyleClassifier& clf,
                       const std::vector<ParallelPair>& pairs,
                       Direction direction, std::string model_name,
                       int bleu_order = 4);

// Corpus BLEU of batched greedy decodes against the references (validation
// scoring when no classifier is available).
double corpus_bleu_of_model(const Seq2SeqModel& model,
                            const std::vector<ParallelPair>& pairs,
                            int bleu_order = 4);

// Fixed-width text table, one row per report, best value per metric column
// marked '*' within each direction. Byte-stable across runs.
std::string render_table(std::span<const MetricsReport> reports);

// Machine-readable rendering (JSON array, full precision).
std::string reports_to_json(std::span<const MetricsReport> reports);

}  // namespace restyle
