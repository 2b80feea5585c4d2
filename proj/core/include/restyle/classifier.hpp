#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "restyle/tensor.hpp"
#include "restyle/types.hpp"

namespace restyle {

// Convolutional sentence classifier: token embeddings, parallel convolution
// banks over windows {3,4,5} with tanh activation and max-over-time pooling,
// then a single logistic output. score(x) is the likelihood that x is in the
// high style.
struct ClassifierConfig {
  int vocab = 0;
  int emb = 32;
  int filters = 16;
  std::vector<int> widths = {3, 4, 5};
};

class StyleClassifier {
 public:
  StyleClassifier(const ClassifierConfig& cfg, std::uint64_t seed);

  const ClassifierConfig& config() const { return cfg_; }
  std::vector<NamedTensor> parameters();
  std::vector<NamedTensor> parameters() const;
  void zero_grad();

  // Differentiable logit from hard token ids (embedding lookup path).
  Tensor logit_hard(std::span<const int> ids) const;

  // Differentiable logit from a [T,V] sequence of vocabulary distributions:
  // each step's input embedding is the probability-weighted average of the
  // embedding rows, the rest of the network is unchanged. On one-hot rows
  // this equals logit_hard exactly.
  Tensor logit_soft(const Tensor& step_probs) const;

  // sigmoid(logit) as a plain value; pure, no graph recorded.
  double score_hard(std::span<const int> ids) const;

  // sigmoid(logit) with gradients flowing back to step_probs.
  Tensor score_soft(const Tensor& step_probs) const;

  Tensor emb;                  // [V,Ec]
  std::vector<Tensor> conv_w;  // per width: [F,w,Ec]
  std::vector<Tensor> conv_b;  // per width: [1,F]
  Tensor out_w, out_b;         // [len(widths)*F,1], [1,1]

 private:
  Tensor trunk(const Tensor& embedded) const;  // [T,Ec] -> [1,1] logit
  ClassifierConfig cfg_;
};

struct LabeledSentence {
  std::vector<int> ids;  // content token ids (no <bos>/<eos>)
  int label = 0;         // 1 = high style
};

struct ClassifierTrainOptions {
  int epochs = 8;
  int batch_size = 16;
  double lr = 1e-3;
  double clip = 5.0;
};

struct ClassifierTrainResult {
  std::vector<double> val_accuracy;  // per epoch
  int best_epoch = 0;                // earliest argmax
};

// Binary cross-entropy training with the best-validation-epoch snapshot
// restored on return. Deterministic given the seed. Throws InputError when
// the training set does not contain both labels.
ClassifierTrainResult train_classifier(StyleClassifier& clf,
                                       const std::vector<LabeledSentence>& train,
                                       const std::vector<LabeledSentence>& valid,
                                       const ClassifierTrainOptions& opts,
                                       std::uint64_t seed);

// Threshold rule shared by training validation and evaluation: a sentence
// counts toward the high style iff score > 0.5 (exactly 0.5 is not-target
// for either direction).
double accuracy_from_scores(std::span<const double> scores, Direction target);

// Fraction of sentences the classifier places in the target style.
double accuracy(const StyleClassifier& clf,
                const std::vector<std::vector<int>>& sentences,
                Direction target);

// Plain classification accuracy against labels (validation criterion).
double label_accuracy(const StyleClassifier& clf,
                      const std::vector<LabeledSentence>& data);

}  // namespace restyle
