#pragma once

#include <cstdint>
#include <vector>

#include "restyle/tensor.hpp"

namespace restyle {

// Adam with bias correction and global-norm gradient clipping applied across
// all parameters jointly before the update. Gradients are zeroed after each
// step. Throws TrainingError (naming the parameter) on a non-finite gradient.
class Adam {
 public:
  explicit Adam(std::vector<NamedTensor> params, double lr = 1e-3,
                double clip_norm = 5.0, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step();

  // Clears moments and the step count (used at phase boundaries).
  void reset();

  std::int64_t step_count() const { return step_count_; }
  double lr() const { return lr_; }

 private:
  std::vector<NamedTensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, clip_norm_, beta1_, beta2_, eps_;
  std::int64_t step_count_ = 0;
};

}  // namespace restyle
