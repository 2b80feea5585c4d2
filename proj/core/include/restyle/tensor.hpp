#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace restyle {

// Dense 64-bit float tensor with reverse-mode automatic differentiation.
//
// Every op executed while grad recording is enabled appends to an implicit
// per-thread tape: each output node remembers its parents, its adjoint rule
// and its position in forward execution order. backward() on a scalar loss
// replays the adjoints in reverse execution order, visiting every recorded
// node exactly once; gradients of tensors used several times accumulate
// additively. Leaf gradients persist across backward calls until zero_grad.
//
// A recorded graph and its tensors belong to one thread at a time. Tensors
// without recorded history are immutable values and safe to share.

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // same length as data once materialized
  bool requires_grad = false;
  std::uint64_t seq = 0;  // forward execution order, unique per thread
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return !backward_fn; }
  std::size_t numel() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

// Scoped switch that turns off graph recording (used for reward decodes and
// evaluation, where only values are needed).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool grad_enabled();

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value,
                     bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }
  int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  std::size_t numel() const { return node_->data.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  std::span<double> data() { return node_->data; }
  std::span<const double> data() const { return node_->data; }
  std::span<double> grad();
  std::span<const double> grad() const;

  // Scalar access; throws ContractError unless numel == 1.
  double item() const;

  double at(int i) const;
  double at(int i, int j) const;
  double at(int i, int j, int k) const;

  // Runs reverse-mode accumulation from this scalar.
  void backward();

  void zero_grad();

  // Detached copy of the values (no history, no grad requirement).
  Tensor detach_copy() const;

  detail::NodePtr node() const { return node_; }

 private:
  friend Tensor make_op(std::vector<int> shape, std::vector<double> data,
                        std::vector<Tensor> parents,
                        std::function<void(detail::Node&)> backward_fn);
  explicit Tensor(detail::NodePtr n) : node_(std::move(n)) {}
  detail::NodePtr node_;
};

// Parameter handle used by models, optimizers and checkpoints.
struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Low-level constructor for recorded operations. Public so tests can build
// controlled graph nodes (e.g. a deliberately wrong adjoint for the gradient
// checker's negative control). The backward_fn reads out.grad and accumulates
// into the parents' grad buffers.
Tensor make_op(std::vector<int> shape, std::vector<double> data,
               std::vector<Tensor> parents,
               std::function<void(detail::Node&)> backward_fn);

// ---- linear algebra ----

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// ---- elementwise ----

Tensor add(const Tensor& a, const Tensor& b);  // same shape
Tensor mul(const Tensor& a, const Tensor& b);  // same shape
Tensor neg(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor log(const Tensor& x);  // DomainError on non-positive input
// a*x + b, elementwise with scalar coefficients
Tensor affine(const Tensor& x, double a, double b);
Tensor clamp(const Tensor& x, double lo, double hi);

// ---- broadcast forms ----

// x [m,n] + bias [1,n], broadcast over rows
Tensor add_bias(const Tensor& x, const Tensor& bias);
// x [m,n] * s [m,1], broadcast over columns
Tensor scale_rows(const Tensor& x, const Tensor& s);

// ---- softmax ----

// Max-subtracted softmax along `axis`. When any entry would fall below
// `kProbFloor` the slice is blended with the uniform distribution just
// enough to lift it there, so outputs stay >= the floor while still summing
// to 1; downstream log() is then always defined. The recorded adjoint is the
// standard softmax rule (exact whenever the floor is inactive, which holds
// for logit gaps below ~27).
inline constexpr double kProbFloor = 1e-12;
Tensor softmax(const Tensor& x, int axis);

// ---- structure ----

Tensor concat_cols(const std::vector<Tensor>& parts);  // along axis 1
Tensor concat_rows(const std::vector<Tensor>& parts);  // along axis 0
Tensor slice_cols(const Tensor& x, int lo, int hi);
Tensor slice_rows(const Tensor& x, int lo, int hi);

// ---- reductions ----

Tensor sum(const Tensor& x);  // full reduction to shape {1}
Tensor mean(const Tensor& x);
// column-wise max over rows: [t,f] -> [1,f]; ties keep the earliest row
Tensor max_over_rows(const Tensor& x);

// ---- indexed ops ----

// rows of table selected by ids: [V,E] gathered to [B,E]
Tensor embed(const Tensor& table, std::span<const int> ids);
// out[r,0] = x[r, ids[r]]
Tensor gather_cols(const Tensor& x, std::span<const int> ids);
// out[b, ids[b][l]] += w[b,l]; duplicated ids accumulate
Tensor scatter_rows(const Tensor& w, const std::vector<std::vector<int>>& ids,
                    int vocab);

// ---- batched attention primitives ----

// steps: L tensors of [B,H] stacked to [B,L,H]
Tensor stack_timesteps(const std::vector<Tensor>& steps);
// scores[b,l] = sum_h q[b,h] * enc[b,l,h]
Tensor bmm_qk(const Tensor& q, const Tensor& enc);
// ctx[b,h] = sum_l w[b,l] * enc[b,l,h]
Tensor bmm_av(const Tensor& w, const Tensor& enc);

// ---- convolution (for the sentence classifier) ----

// x [T,E], kernel [F,w,E], bias [1,F] -> [T-w+1, F]
Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias);

// ---- gradient checking ----

struct GradCheckFailure {
  std::size_t index;
  double analytic;
  double numeric;
  double rel_err;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_err = 0.0;
  std::vector<GradCheckFailure> failures;
  bool pass() const { return failures.empty(); }
};

// Compares backward() gradients of f against central finite differences
// (f(x+h)-f(x-h))/2h elementwise. f must be scalar-valued and deterministic.
// Relative error uses max(1, |analytic|, |numeric|) as denominator.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double step = 1e-3,
                           double tol = 1e-4);

}  // namespace restyle
