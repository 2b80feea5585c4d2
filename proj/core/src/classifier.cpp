#include "restyle/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "restyle/errors.hpp"
#include "restyle/optimizer.hpp"
#include "restyle/rng.hpp"
#include "restyle/vocab.hpp"

namespace restyle {

namespace {

Tensor init_uniform(std::vector<int> shape, Rng& rng, double scale = 0.08) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(data), true);
}

int max_width(const ClassifierConfig& cfg) {
  return *std::max_element(cfg.widths.begin(), cfg.widths.end());
}

}  // namespace

StyleClassifier::StyleClassifier(const ClassifierConfig& cfg,
                                 std::uint64_t seed)
    : cfg_(cfg) {
  if (cfg.vocab < 5) throw ConfigError("StyleClassifier: vocab too small");
  if (cfg.widths.empty()) throw ConfigError("StyleClassifier: no windows");
  Rng rng(split_seed(seed, "classifier-init"));
  emb = init_uniform({cfg.vocab, cfg.emb}, rng);
  for (int w : cfg.widths) {
    conv_w.push_back(init_uniform({cfg.filters, w, cfg.emb}, rng));
    conv_b.push_back(init_uniform({1, cfg.filters}, rng));
  }
  out_w = init_uniform({static_cast<int>(cfg.widths.size()) * cfg.filters, 1},
                       rng);
  out_b = init_uniform({1, 1}, rng);
}

std::vector<NamedTensor> StyleClassifier::parameters() {
  std::vector<NamedTensor> params{{"emb", emb}};
  for (std::size_t i = 0; i < conv_w.size(); ++i) {
    std::string w = std::to_string(cfg_.widths[i]);
    params.push_back({"conv" + w + "_w", conv_w[i]});
    params.push_back({"conv" + w + "_b", conv_b[i]});
  }
  params.push_back({"out_w", out_w});
  params.push_back({"out_b", out_b});
  return params;
}

std::vector<NamedTensor> StyleClassifier::parameters() const {
  return const_cast<StyleClassifier*>(this)->parameters();
}

void StyleClassifier::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

Tensor StyleClassifier::trunk(const Tensor& embedded) const {
  std::vector<Tensor> pooled;
  pooled.reserve(conv_w.size());
  for (std::size_t i = 0; i < conv_w.size(); ++i)
    pooled.push_back(
        max_over_rows(tanh(conv1d(embedded, conv_w[i], conv_b[i]))));
  Tensor feat = concat_cols(pooled);
  return add_bias(matmul(feat, out_w), out_b);
}

Tensor StyleClassifier::logit_hard(std::span<const int> ids) const {
  // sentences shorter than the largest window are padded with <pad>
  std::vector<int> padded(ids.begin(), ids.end());
  while (static_cast<int>(padded.size()) < max_width(cfg_))
    padded.push_back(kPadId);
  return trunk(embed(emb, padded));
}

Tensor StyleClassifier::logit_soft(const Tensor& step_probs) const {
  if (step_probs.ndim() != 2 || step_probs.dim(1) != cfg_.vocab)
    throw ShapeError("logit_soft: expected [T," + std::to_string(cfg_.vocab) +
                     "] distributions");
  Tensor probs = step_probs;
  const int need = max_width(cfg_) - probs.dim(0);
  if (need > 0) {
    // pad with one-hot <pad> rows so the soft path matches the hard one
    std::vector<double> row(static_cast<std::size_t>(cfg_.vocab), 0.0);
    row[kPadId] = 1.0;
    std::vector<double> data;
    for (int i = 0; i < need; ++i)
      data.insert(data.end(), row.begin(), row.end());
    Tensor pad = Tensor::from({need, cfg_.vocab}, std::move(data));
    probs = concat_rows({probs, pad});
  }
  return trunk(matmul(probs, emb));
}

double StyleClassifier::score_hard(std::span<const int> ids) const {
  NoGradGuard no_grad;
  double logit = logit_hard(ids).item();
  if (logit >= 0.0) return 1.0 / (1.0 + std::exp(-logit));
  double e = std::exp(logit);
  return e / (1.0 + e);
}

Tensor StyleClassifier::score_soft(const Tensor& step_probs) const {
  return sigmoid(logit_soft(step_probs));
}

ClassifierTrainResult train_classifier(StyleClassifier& clf,
                                       const std::vector<LabeledSentence>& train,
                                       const std::vector<LabeledSentence>& valid,
                                       const ClassifierTrainOptions& opts,
                                       std::uint64_t seed) {
  bool has_low = false, has_high = false;
  for (const auto& s : train) {
    if (s.label == 0) has_low = true;
    if (s.label == 1) has_high = true;
  }
  if (!has_low || !has_high)
    throw InputError("train_classifier: corpus must contain both styles");

  Adam optimizer(clf.parameters(), opts.lr, opts.clip);
  Rng shuffle_rng(split_seed(seed, "classifier-shuffle"));

  ClassifierTrainResult result;
  std::vector<std::vector<double>> best_params;
  double best_acc = -1.0;

  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opts.batch_size)) {
      std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(opts.batch_size));
      Tensor loss = Tensor::zeros({1, 1});
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = train[static_cast<std::size_t>(order[i])];
        Tensor s = sigmoid(clf.logit_hard(ex.ids));
        Tensor sc = clamp(s, 1e-12, 1.0 - 1e-12);
        Tensor term =
            ex.label == 1 ? neg(log(sc)) : neg(log(affine(sc, -1.0, 1.0)));
        loss = add(loss, term);
      }
      Tensor scaled = affine(loss, 1.0 / static_cast<double>(end - start), 0.0);
      scaled.backward();
      optimizer.step();
    }
    double acc = label_accuracy(clf, valid);
    result.val_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      result.best_epoch = epoch;
      best_params.clear();
      for (auto& p : clf.parameters())
        best_params.emplace_back(p.tensor.data().begin(),
                                 p.tensor.data().end());
    }
  }

  auto params = clf.parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    std::copy(best_params[i].begin(), best_params[i].end(),
              params[i].tensor.data().begin());
  return result;
}

double accuracy_from_scores(std::span<const double> scores, Direction target) {
  if (scores.empty()) throw InputError("accuracy: empty sentence list");
  int hits = 0;
  for (double s : scores) {
    bool in_target =
        target == Direction::LowToHigh ? (s > 0.5) : (s < 0.5);
    if (in_target) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double accuracy(const StyleClassifier& clf,
                const std::vector<std::vector<int>>& sentences,
                Direction target) {
  if (sentences.empty()) throw InputError("accuracy: empty sentence list");
  std::vector<double> scores;
  scores.reserve(sentences.size());
  for (const auto& s : sentences) scores.push_back(clf.score_hard(s));
  return accuracy_from_scores(scores, target);
}

double label_accuracy(const StyleClassifier& clf,
                      const std::vector<LabeledSentence>& data) {
  if (data.empty()) throw InputError("label_accuracy: empty data");
  int hits = 0;
  for (const auto& ex : data) {
    int pred = clf.score_hard(ex.ids) > 0.5 ? 1 : 0;
    if (pred == ex.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace restyle
