#include "restyle/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "restyle/errors.hpp"

namespace restyle {

Adam::Adam(std::vector<NamedTensor> params, double lr, double clip_norm,
           double beta1, double beta2, double eps)
    : params_(std::move(params)),
      lr_(lr),
      clip_norm_(clip_norm),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  for (const auto& p : params_) {
    if (!p.tensor.requires_grad())
      throw ContractError("Adam: parameter '" + p.name +
                          "' does not require grad");
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void Adam::step() {
  double sq_norm = 0.0;
  for (const auto& p : params_) {
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g))
        throw TrainingError("Adam: non-finite gradient in parameter '" +
                            p.name + "'");
      sq_norm += g * g;
    }
  }
  const double norm = std::sqrt(sq_norm);
  const double scale = (clip_norm_ > 0.0 && norm > clip_norm_)
                           ? clip_norm_ / norm
                           : 1.0;

  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));

  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    auto data = params_[pi].tensor.data();
    auto grad = params_[pi].tensor.grad();
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i] * scale;
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
  for (auto& p : params_) p.tensor.zero_grad();
}

void Adam::reset() {
  for (auto& m : m_) std::fill(m.begin(), m.end(), 0.0);
  for (auto& v : v_) std::fill(v.begin(), v.end(), 0.0);
  step_count_ = 0;
}

}  // namespace restyle
