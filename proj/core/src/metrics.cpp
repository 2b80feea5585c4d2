#include "restyle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "restyle/bleu.hpp"
#include "restyle/errors.hpp"
#include "restyle/vocab.hpp"

namespace restyle {

double overall_score(double bleu, double accuracy) {
  if (!(bleu >= 0.0 && bleu <= 1.0))
    throw ContractError("overall_score: bleu " + std::to_string(bleu) +
                        " outside [0,1]");
  if (!(accuracy >= 0.0 && accuracy <= 1.0))
    throw ContractError("overall_score: accuracy " + std::to_string(accuracy) +
                        " outside [0,1]");
  const double denom = bleu + accuracy;
  if (denom == 0.0) return 0.0;
  return bleu * accuracy / denom;
}

namespace {

std::vector<int> reference_content(const ParallelPair& pair) {
  std::vector<int> ref = pair.tgt;
  if (!ref.empty() && ref.back() == kEosId) ref.pop_back();
  return ref;
}

}  // namespace

MetricsReport evaluate(const DecodeFn& decode, const ScoreFn& score,
                       const std::vector<ParallelPair>& pairs,
                       Direction direction, std::string model_name,
                       int bleu_order) {
  if (pairs.empty()) throw InputError("evaluate: empty test set");

  MetricsReport report;
  report.model = std::move(model_name);
  report.direction = direction;

  std::vector<std::vector<int>> outputs, references;
  std::vector<double> scores;
  for (const auto& pair : pairs) {
    std::vector<int> out = decode(pair.src);
    std::vector<int> ref = reference_content(pair);
    double s = score(out);
    SentenceDiag diag;
    diag.output = out;
    diag.sbleu = sentence_bleu(out, ref, bleu_order);
    diag.style_score = s;
    diag.in_target = direction == Direction::LowToHigh ? (s > 0.5) : (s < 0.5);
    report.sentences.push_back(std::move(diag));
    outputs.push_back(std::move(out));
    references.push_back(std::move(ref));
    scores.push_back(s);
  }
  report.bleu = corpus_bleu(outputs, references, bleu_order);
  report.accuracy = accuracy_from_scores(scores, direction);
  report.overall = overall_score(report.bleu, report.accuracy);
  return report;
}

namespace {

// chunked batched greedy decode, order-preserving
std::vector<std::vector<int>> decode_all(const Seq2SeqModel& model,
                                         const std::vector<ParallelPair>& pairs,
                                         int chunk = 32) {
  std::vector<std::vector<int>> outputs;
  outputs.reserve(pairs.size());
  const int max_len = model.config().max_decode_len;
  for (std::size_t start = 0; start < pairs.size();
       start += static_cast<std::size_t>(chunk)) {
    std::size_t end =
        std::min(pairs.size(), start + static_cast<std::size_t>(chunk));
    int l = 0;
    for (std::size_t i = start; i < end; ++i)
      l = std::max(l, static_cast<int>(pairs[i].src.size()));
    std::vector<std::vector<int>> src;
    std::vector<int> len;
    for (std::size_t i = start; i < end; ++i) {
      std::vector<int> row = pairs[i].src;
      len.push_back(static_cast<int>(row.size()));
      row.resize(static_cast<std::size_t>(l), kPadId);
      src.push_back(std::move(row));
    }
    for (auto& hyp : decode_greedy_batch(model, src, len, max_len))
      outputs.push_back(hyp.content());
  }
  return outputs;
}

}  // namespace

MetricsReport evaluate(const Seq2SeqModel& model, const StyleClassifier& clf,
                       const std::vector<ParallelPair>& pairs,
                       Direction direction, std::string model_name,
                       int bleu_order) {
  if (pairs.empty()) throw InputError("evaluate: empty test set");
  auto outputs = decode_all(model, pairs);
  std::size_t next = 0;
  DecodeFn decode = [&outputs, &next](const std::vector<int>&) {
    return outputs[next++];
  };
  ScoreFn score = [&clf](const std::vector<int>& content) {
    return clf.score_hard(content);
  };
  return evaluate(decode, score, pairs, direction, std::move(model_name),
                  bleu_order);
}

double corpus_bleu_of_model(const Seq2SeqModel& model,
                            const std::vector<ParallelPair>& pairs,
                            int bleu_order) {
  if (pairs.empty()) throw InputError("corpus_bleu_of_model: empty set");
  auto outputs = decode_all(model, pairs);
  std::vector<std::vector<int>> references;
  references.reserve(pairs.size());
  for (const auto& pair : pairs) references.push_back(reference_content(pair));
  return corpus_bleu(outputs, references, bleu_order);
}

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string render_table(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InputError("render_table: no reports");

  // best per metric within each direction
  auto best_of = [&reports](Direction d, auto&& get) {
    double best = -1.0;
    for (const auto& r : reports)
      if (r.direction == d) best = std::max(best, get(r));
    return best;
  };
  struct Best {
    double bleu, acc, overall;
  };
  Best best_low{best_of(Direction::LowToHigh, [](auto& r) { return r.bleu; }),
                best_of(Direction::LowToHigh, [](auto& r) { return r.accuracy; }),
                best_of(Direction::LowToHigh, [](auto& r) { return r.overall; })};
  Best best_high{best_of(Direction::HighToLow, [](auto& r) { return r.bleu; }),
                 best_of(Direction::HighToLow, [](auto& r) { return r.accuracy; }),
                 best_of(Direction::HighToLow, [](auto& r) { return r.overall; })};

  std::size_t name_w = 5;
  for (const auto& r : reports) name_w = std::max(name_w, r.model.size());

  std::ostringstream os;
  os << "model" << std::string(name_w - 5, ' ')
     << "  bleu    accuracy  overall  direction\n";
  for (const auto& r : reports) {
    const Best& best =
        r.direction == Direction::LowToHigh ? best_low : best_high;
    auto cell = [](double v, double best) {
      return (v == best ? "*" : " ") + fixed3(v);
    };
    os << r.model << std::string(name_w - r.model.size(), ' ') << " "
       << cell(r.bleu, best.bleu) << "  " << cell(r.accuracy, best.acc)
       << "   " << cell(r.overall, best.overall) << "  "
       << to_string(r.direction) << "\n";
  }
  return os.str();
}

std::string reports_to_json(std::span<const MetricsReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    arr.push_back({{"model", r.model},
                   {"bleu", r.bleu},
                   {"accuracy", r.accuracy},
                   {"overall", r.overall},
                   {"direction", to_string(r.direction)}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace restyle
