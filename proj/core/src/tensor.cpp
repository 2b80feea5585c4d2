#include "restyle/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "restyle/errors.hpp"

namespace restyle {

namespace {

thread_local bool g_grad_enabled = true;
thread_local std::uint64_t g_seq_counter = 0;

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void require_2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2)
    throw ShapeError(std::string(op) + ": expected 2-D tensor, got " +
                     shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

detail::NodePtr new_node(std::vector<int> shape, std::vector<double> data,
                         bool requires_grad) {
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  n->seq = ++g_seq_counter;
  if (requires_grad) n->ensure_grad();
  return n;
}

}  // namespace

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool grad_enabled() { return g_grad_enabled; }

// ---- Tensor basics ----

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, 0.0),
                         requires_grad));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, value),
                         requires_grad));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data,
                    bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw ShapeError("Tensor::from: " + shape_str(shape) + " incompatible with " +
                     std::to_string(data.size()) + " values");
  return Tensor(new_node(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(new_node({1}, {value}, requires_grad));
}

std::span<double> Tensor::grad() {
  if (!node_->requires_grad)
    throw ContractError("Tensor::grad: tensor does not require grad");
  node_->ensure_grad();
  return node_->grad;
}

std::span<const double> Tensor::grad() const {
  if (!node_->requires_grad)
    throw ContractError("Tensor::grad: tensor does not require grad");
  node_->ensure_grad();
  return node_->grad;
}

double Tensor::item() const {
  if (numel() != 1)
    throw ContractError("Tensor::item: expected scalar, got " +
                        shape_str(shape()));
  return node_->data[0];
}

double Tensor::at(int i) const {
  return node_->data[static_cast<std::size_t>(i)];
}

double Tensor::at(int i, int j) const {
  return node_->data[static_cast<std::size_t>(i) *
                         static_cast<std::size_t>(shape().back()) +
                     static_cast<std::size_t>(j)];
}

double Tensor::at(int i, int j, int k) const {
  const auto& s = shape();
  return node_->data[(static_cast<std::size_t>(i) * s[1] + j) * s[2] + k];
}

void Tensor::zero_grad() {
  if (node_ && node_->requires_grad) node_->grad.assign(node_->data.size(), 0.0);
}

Tensor Tensor::detach_copy() const {
  return Tensor(new_node(node_->shape, node_->data, false));
}

void Tensor::backward() {
  if (!node_) throw ContractError("backward: undefined tensor");
  if (numel() != 1)
    throw ContractError("backward: loss must be scalar, got " +
                        shape_str(shape()));
  if (!node_->requires_grad)
    throw ContractError("backward: loss does not require grad");

  // Collect every reachable node once.
  std::vector<detail::Node*> order;
  std::vector<detail::Node*> stack{node_.get()};
  std::vector<detail::Node*> seen;
  auto mark = [&seen](detail::Node* n) {
    // visited flag via sorted vector lookup; graphs are small enough
    auto it = std::lower_bound(seen.begin(), seen.end(), n);
    if (it != seen.end() && *it == n) return false;
    seen.insert(it, n);
    return true;
  };
  mark(node_.get());
  while (!stack.empty()) {
    detail::Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (mark(p.get())) stack.push_back(p.get());
    }
  }

  // Interior gradients restart from zero on every pass; leaf gradients
  // accumulate until an explicit zero_grad.
  for (detail::Node* n : order) {
    if (!n->requires_grad) continue;
    if (n->is_leaf()) {
      n->ensure_grad();
    } else {
      n->grad.assign(n->data.size(), 0.0);
    }
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;

  std::vector<detail::Node*> recorded;
  recorded.reserve(order.size());
  for (detail::Node* n : order) {
    if (n->backward_fn) recorded.push_back(n);
  }
  std::sort(recorded.begin(), recorded.end(),
            [](const detail::Node* a, const detail::Node* b) {
              return a->seq > b->seq;
            });
  for (detail::Node* n : recorded) n->backward_fn(*n);
}

Tensor make_op(std::vector<int> shape, std::vector<double> data,
               std::vector<Tensor> parents,
               std::function<void(detail::Node&)> backward_fn) {
  if (shape_numel(shape) != data.size())
    throw ShapeError("make_op: shape/data size mismatch");
  bool rg = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) rg = rg || p.requires_grad();
  }
  auto n = new_node(std::move(shape), std::move(data), rg);
  if (rg) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor(n);
}

namespace {

// Materializes the grad buffer of parent `i` if it participates in autodiff.
double* parent_grad(detail::Node& out, std::size_t i) {
  detail::Node* p = out.parents[i].get();
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p->grad.data();
}

}  // namespace

// ---- linear algebra ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for (int i = 0; i < m; ++i) {
    double* dst = out.data() + static_cast<std::size_t>(i) * n;
    const double* arow = pa + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      if (aik == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) dst[j] += aik * brow[j];
    }
  }
  return make_op(
      {m, n}, std::move(out), {a, b}, [m, k, n](detail::Node& o) {
        const double* g = o.grad.data();
        const double* pa = o.parents[0]->data.data();
        const double* pb = o.parents[1]->data.data();
        if (double* da = parent_grad(o, 0)) {
          // dA = dC * B^T
          for (int i = 0; i < m; ++i) {
            const double* grow = g + static_cast<std::size_t>(i) * n;
            double* darow = da + static_cast<std::size_t>(i) * k;
            for (int kk = 0; kk < k; ++kk) {
              const double* brow = pb + static_cast<std::size_t>(kk) * n;
              double acc = 0.0;
              for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
              darow[kk] += acc;
            }
          }
        }
        if (double* db = parent_grad(o, 1)) {
          // dB = A^T * dC
          for (int i = 0; i < m; ++i) {
            const double* arow = pa + static_cast<std::size_t>(i) * k;
            const double* grow = g + static_cast<std::size_t>(i) * n;
            for (int kk = 0; kk < k; ++kk) {
              const double aik = arow[kk];
              if (aik == 0.0) continue;
              double* dbrow = db + static_cast<std::size_t>(kk) * n;
              for (int j = 0; j < n; ++j) dbrow[j] += aik * grow[j];
            }
          }
        }
      });
}

// ---- elementwise ----

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.data()[i] + b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](detail::Node& o) {
    const double* g = o.grad.data();
    if (double* da = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i) da[i] += g[i];
    if (double* db = parent_grad(o, 1))
      for (std::size_t i = 0; i < o.numel(); ++i) db[i] += g[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.data()[i] * b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](detail::Node& o) {
    const double* g = o.grad.data();
    const double* pa = o.parents[0]->data.data();
    const double* pb = o.parents[1]->data.data();
    if (double* da = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i) da[i] += g[i] * pb[i];
    if (double* db = parent_grad(o, 1))
      for (std::size_t i = 0; i < o.numel(); ++i) db[i] += g[i] * pa[i];
  });
}

Tensor neg(const Tensor& x) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -x.data()[i];
  return make_op(x.shape(), std::move(out), {x}, [](detail::Node& o) {
    const double* g = o.grad.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i) dx[i] -= g[i];
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = x.data()[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return make_op(x.shape(), std::move(out), {x}, [](detail::Node& o) {
    const double* g = o.grad.data();
    const double* y = o.data.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i)
        dx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.data()[i]);
  return make_op(x.shape(), std::move(out), {x}, [](detail::Node& o) {
    const double* g = o.grad.data();
    const double* y = o.data.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i)
        dx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Tensor log(const Tensor& x) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = x.data()[i];
    if (!(v > 0.0))
      throw DomainError("log: non-positive input " + std::to_string(v) +
                        " at flat index " + std::to_string(i));
    out[i] = std::log(v);
  }
  return make_op(x.shape(), std::move(out), {x}, [](detail::Node& o) {
    const double* g = o.grad.data();
    const double* px = o.parents[0]->data.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i) dx[i] += g[i] / px[i];
  });
}

Tensor affine(const Tensor& x, double a, double b) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x.data()[i] + b;
  return make_op(x.shape(), std::move(out), {x}, [a](detail::Node& o) {
    const double* g = o.grad.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i) dx[i] += a * g[i];
  });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("clamp: lo > hi");
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::min(std::max(x.data()[i], lo), hi);
  return make_op(x.shape(), std::move(out), {x}, [lo, hi](detail::Node& o) {
    const double* g = o.grad.data();
    const double* px = o.parents[0]->data.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.numel(); ++i)
        if (px[i] > lo && px[i] < hi) dx[i] += g[i];
  });
}

// ---- broadcast forms ----

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_2d(x, "add_bias");
  require_2d(bias, "add_bias");
  if (bias.dim(0) != 1 || bias.dim(1) != x.dim(1))
    throw ShapeError("add_bias: bias " + shape_str(bias.shape()) +
                     " does not broadcast over " + shape_str(x.shape()));
  const int m = x.dim(0), n = x.dim(1);
  std::vector<double> out(x.numel());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] =
          x.at(i, j) + bias.data()[static_cast<std::size_t>(j)];
  return make_op(x.shape(), std::move(out), {x, bias},
                 [m, n](detail::Node& o) {
                   const double* g = o.grad.data();
                   if (double* dx = parent_grad(o, 0))
                     for (std::size_t i = 0; i < o.numel(); ++i) dx[i] += g[i];
                   if (double* db = parent_grad(o, 1))
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < n; ++j)
                         db[j] += g[static_cast<std::size_t>(i) * n + j];
                 });
}

Tensor scale_rows(const Tensor& x, const Tensor& s) {
  require_2d(x, "scale_rows");
  require_2d(s, "scale_rows");
  if (s.dim(0) != x.dim(0) || s.dim(1) != 1)
    throw ShapeError("scale_rows: scale " + shape_str(s.shape()) +
                     " does not broadcast over " + shape_str(x.shape()));
  const int m = x.dim(0), n = x.dim(1);
  std::vector<double> out(x.numel());
  for (int i = 0; i < m; ++i) {
    double si = s.data()[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] = x.at(i, j) * si;
  }
  return make_op(
      x.shape(), std::move(out), {x, s}, [m, n](detail::Node& o) {
        const double* g = o.grad.data();
        const double* px = o.parents[0]->data.data();
        const double* ps = o.parents[1]->data.data();
        if (double* dx = parent_grad(o, 0))
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
              dx[static_cast<std::size_t>(i) * n + j] +=
                  g[static_cast<std::size_t>(i) * n + j] * ps[i];
        if (double* ds = parent_grad(o, 1))
          for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
              acc += g[static_cast<std::size_t>(i) * n + j] *
                     px[static_cast<std::size_t>(i) * n + j];
            ds[i] += acc;
          }
      });
}

// ---- softmax ----

Tensor softmax(const Tensor& x, int axis) {
  const auto& shape = x.shape();
  if (axis < 0) axis += static_cast<int>(shape.size());
  if (axis < 0 || axis >= static_cast<int>(shape.size()))
    throw ShapeError("softmax: axis out of range for " + shape_str(shape));
  const int n = shape[static_cast<std::size_t>(axis)];
  if (n < 1) throw ShapeError("softmax: empty axis");
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(shape[i]);
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i)
    inner *= static_cast<std::size_t>(shape[i]);

  std::vector<double> out(x.numel());
  const double* px = x.data().data();
  const double lam = kProbFloor * n;  // uniform blend weight when flooring
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double mx = px[base];
      for (int t = 1; t < n; ++t)
        mx = std::max(mx, px[base + static_cast<std::size_t>(t) * inner]);
      double sum = 0.0;
      for (int t = 0; t < n; ++t) {
        double e = std::exp(px[base + static_cast<std::size_t>(t) * inner] - mx);
        out[base + static_cast<std::size_t>(t) * inner] = e;
        sum += e;
      }
      double mn = 1.0;
      for (int t = 0; t < n; ++t) {
        std::size_t idx = base + static_cast<std::size_t>(t) * inner;
        out[idx] /= sum;
        mn = std::min(mn, out[idx]);
      }
      if (mn < kProbFloor) {
        // Blend with the uniform distribution just enough to lift every
        // entry to the floor; keeps the slice summing to 1.
        for (int t = 0; t < n; ++t) {
          std::size_t idx = base + static_cast<std::size_t>(t) * inner;
          out[idx] = (1.0 - lam) * out[idx] + kProbFloor;
        }
      }
    }
  }
  return make_op(
      shape, std::move(out), {x},
      [outer, inner, n](detail::Node& o) {
        // Standard softmax adjoint on the emitted values. Exact except in
        // the floored regime, where the correction is O(n * 1e-12).
        const double* g = o.grad.data();
        const double* y = o.data.data();
        double* dx = parent_grad(o, 0);
        if (!dx) return;
        for (std::size_t ou = 0; ou < outer; ++ou) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = ou * n * inner + in;
            double dot = 0.0;
            for (int t = 0; t < n; ++t) {
              std::size_t idx = base + static_cast<std::size_t>(t) * inner;
              dot += g[idx] * y[idx];
            }
            for (int t = 0; t < n; ++t) {
              std::size_t idx = base + static_cast<std::size_t>(t) * inner;
              dx[idx] += y[idx] * (g[idx] - dot);
            }
          }
        }
      });
}

// ---- structure ----

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no parts");
  const int m = parts[0].dim(0);
  int total = 0;
  for (const auto& p : parts) {
    require_2d(p, "concat_cols");
    if (p.dim(0) != m)
      throw ShapeError("concat_cols: row mismatch " + shape_str(p.shape()));
    total += p.dim(1);
  }
  std::vector<double> out(static_cast<std::size_t>(m) * total);
  int off = 0;
  for (const auto& p : parts) {
    const int n = p.dim(1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i) * total + off + j] = p.at(i, j);
    off += n;
  }
  std::vector<int> widths;
  for (const auto& p : parts) widths.push_back(p.dim(1));
  return make_op(
      {m, total}, std::move(out), parts,
      [m, total, widths](detail::Node& o) {
        const double* g = o.grad.data();
        int off = 0;
        for (std::size_t pi = 0; pi < widths.size(); ++pi) {
          const int n = widths[pi];
          if (double* dp = parent_grad(o, pi))
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j)
                dp[static_cast<std::size_t>(i) * n + j] +=
                    g[static_cast<std::size_t>(i) * total + off + j];
          off += n;
        }
      });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const int n = parts[0].dim(1);
  int total = 0;
  for (const auto& p : parts) {
    require_2d(p, "concat_rows");
    if (p.dim(1) != n)
      throw ShapeError("concat_rows: column mismatch " + shape_str(p.shape()));
    total += p.dim(0);
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total) * n);
  for (const auto& p : parts)
    out.insert(out.end(), p.data().begin(), p.data().end());
  std::vector<int> heights;
  for (const auto& p : parts) heights.push_back(p.dim(0));
  return make_op({total, n}, std::move(out), parts,
                 [n, heights](detail::Node& o) {
                   const double* g = o.grad.data();
                   std::size_t off = 0;
                   for (std::size_t pi = 0; pi < heights.size(); ++pi) {
                     const std::size_t sz =
                         static_cast<std::size_t>(heights[pi]) * n;
                     if (double* dp = parent_grad(o, pi))
                       for (std::size_t i = 0; i < sz; ++i)
                         dp[i] += g[off + i];
                     off += sz;
                   }
                 });
}

Tensor slice_cols(const Tensor& x, int lo, int hi) {
  require_2d(x, "slice_cols");
  if (lo < 0 || hi > x.dim(1) || lo >= hi)
    throw ShapeError("slice_cols: range [" + std::to_string(lo) + "," +
                     std::to_string(hi) + ") invalid for " +
                     shape_str(x.shape()));
  const int m = x.dim(0), n = x.dim(1), w = hi - lo;
  std::vector<double> out(static_cast<std::size_t>(m) * w);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j)
      out[static_cast<std::size_t>(i) * w + j] = x.at(i, lo + j);
  return make_op({m, w}, std::move(out), {x},
                 [m, n, w, lo](detail::Node& o) {
                   const double* g = o.grad.data();
                   if (double* dx = parent_grad(o, 0))
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < w; ++j)
                         dx[static_cast<std::size_t>(i) * n + lo + j] +=
                             g[static_cast<std::size_t>(i) * w + j];
                 });
}

Tensor slice_rows(const Tensor& x, int lo, int hi) {
  require_2d(x, "slice_rows");
  if (lo < 0 || hi > x.dim(0) || lo >= hi)
    throw ShapeError("slice_rows: range [" + std::to_string(lo) + "," +
                     std::to_string(hi) + ") invalid for " +
                     shape_str(x.shape()));
  const int n = x.dim(1), h = hi - lo;
  std::vector<double> out(x.data().begin() + static_cast<std::size_t>(lo) * n,
                          x.data().begin() + static_cast<std::size_t>(hi) * n);
  return make_op({h, n}, std::move(out), {x}, [n, h, lo](detail::Node& o) {
    const double* g = o.grad.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < static_cast<std::size_t>(h) * n; ++i)
        dx[static_cast<std::size_t>(lo) * n + i] += g[i];
  });
}

// ---- reductions ----

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return make_op({1}, {acc}, {x}, [](detail::Node& o) {
    const double g = o.grad[0];
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.parents[0]->numel(); ++i) dx[i] += g;
  });
}

Tensor mean(const Tensor& x) {
  const double inv = 1.0 / static_cast<double>(x.numel());
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return make_op({1}, {acc * inv}, {x}, [inv](detail::Node& o) {
    const double g = o.grad[0] * inv;
    if (double* dx = parent_grad(o, 0))
      for (std::size_t i = 0; i < o.parents[0]->numel(); ++i) dx[i] += g;
  });
}

Tensor max_over_rows(const Tensor& x) {
  require_2d(x, "max_over_rows");
  const int t = x.dim(0), f = x.dim(1);
  std::vector<double> out(static_cast<std::size_t>(f));
  std::vector<int> arg(static_cast<std::size_t>(f), 0);
  for (int j = 0; j < f; ++j) {
    double best = x.at(0, j);
    int bi = 0;
    for (int i = 1; i < t; ++i) {
      if (x.at(i, j) > best) {
        best = x.at(i, j);
        bi = i;
      }
    }
    out[static_cast<std::size_t>(j)] = best;
    arg[static_cast<std::size_t>(j)] = bi;
  }
  return make_op({1, f}, std::move(out), {x}, [f, arg](detail::Node& o) {
    const double* g = o.grad.data();
    const int n = f;
    if (double* dx = parent_grad(o, 0))
      for (int j = 0; j < n; ++j)
        dx[static_cast<std::size_t>(arg[static_cast<std::size_t>(j)]) * n + j] +=
            g[j];
  });
}

// ---- indexed ops ----

Tensor embed(const Tensor& table, std::span<const int> ids) {
  require_2d(table, "embed");
  const int v = table.dim(0), e = table.dim(1);
  const int b = static_cast<int>(ids.size());
  std::vector<double> out(static_cast<std::size_t>(b) * e);
  for (int r = 0; r < b; ++r) {
    int id = ids[static_cast<std::size_t>(r)];
    if (id < 0 || id >= v)
      throw ContractError("embed: token id " + std::to_string(id) +
                          " out of range for table " + shape_str(table.shape()));
    for (int j = 0; j < e; ++j)
      out[static_cast<std::size_t>(r) * e + j] = table.at(id, j);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return make_op({b, e}, std::move(out), {table},
                 [e, idv](detail::Node& o) {
                   const double* g = o.grad.data();
                   if (double* dt = parent_grad(o, 0))
                     for (std::size_t r = 0; r < idv.size(); ++r)
                       for (int j = 0; j < e; ++j)
                         dt[static_cast<std::size_t>(idv[r]) * e + j] +=
                             g[r * e + j];
                 });
}

Tensor gather_cols(const Tensor& x, std::span<const int> ids) {
  require_2d(x, "gather_cols");
  const int m = x.dim(0), n = x.dim(1);
  if (static_cast<int>(ids.size()) != m)
    throw ShapeError("gather_cols: " + std::to_string(ids.size()) +
                     " ids for " + shape_str(x.shape()));
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    int id = ids[static_cast<std::size_t>(r)];
    if (id < 0 || id >= n)
      throw ContractError("gather_cols: index " + std::to_string(id) +
                          " out of range for " + shape_str(x.shape()));
    out[static_cast<std::size_t>(r)] = x.at(r, id);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return make_op({m, 1}, std::move(out), {x}, [n, idv](detail::Node& o) {
    const double* g = o.grad.data();
    if (double* dx = parent_grad(o, 0))
      for (std::size_t r = 0; r < idv.size(); ++r)
        dx[r * n + static_cast<std::size_t>(idv[r])] += g[r];
  });
}

Tensor scatter_rows(const Tensor& w, const std::vector<std::vector<int>>& ids,
                    int vocab) {
  require_2d(w, "scatter_rows");
  const int b = w.dim(0), l = w.dim(1);
  if (static_cast<int>(ids.size()) != b)
    throw ShapeError("scatter_rows: id rows " + std::to_string(ids.size()) +
                     " vs weights " + shape_str(w.shape()));
  std::vector<double> out(static_cast<std::size_t>(b) * vocab, 0.0);
  for (int r = 0; r < b; ++r) {
    if (static_cast<int>(ids[static_cast<std::size_t>(r)].size()) != l)
      throw ShapeError("scatter_rows: id row length mismatch");
    for (int j = 0; j < l; ++j) {
      int id = ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
      if (id < 0 || id >= vocab)
        throw ContractError("scatter_rows: token id " + std::to_string(id) +
                            " out of vocab " + std::to_string(vocab));
      out[static_cast<std::size_t>(r) * vocab + id] += w.at(r, j);
    }
  }
  return make_op({b, vocab}, std::move(out), {w},
                 [l, vocab, ids](detail::Node& o) {
                   const double* g = o.grad.data();
                   if (double* dw = parent_grad(o, 0))
                     for (std::size_t r = 0; r < ids.size(); ++r)
                       for (int j = 0; j < l; ++j)
                         dw[r * l + j] +=
                             g[r * vocab +
                               static_cast<std::size_t>(ids[r][j])];
                 });
}

// ---- batched attention primitives ----

Tensor stack_timesteps(const std::vector<Tensor>& steps) {
  if (steps.empty()) throw ContractError("stack_timesteps: no steps");
  const int b = steps[0].dim(0), h = steps[0].dim(1);
  const int l = static_cast<int>(steps.size());
  for (const auto& s : steps) {
    require_2d(s, "stack_timesteps");
    if (s.dim(0) != b || s.dim(1) != h)
      throw ShapeError("stack_timesteps: inconsistent step " +
                       shape_str(s.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(b) * l * h);
  for (int t = 0; t < l; ++t)
    for (int r = 0; r < b; ++r)
      for (int j = 0; j < h; ++j)
        out[(static_cast<std::size_t>(r) * l + t) * h + j] = steps[t].at(r, j);
  return make_op({b, l, h}, std::move(out), steps,
                 [b, l, h](detail::Node& o) {
                   const double* g = o.grad.data();
                   for (int t = 0; t < l; ++t) {
                     if (double* ds = parent_grad(o, static_cast<std::size_t>(t)))
                       for (int r = 0; r < b; ++r)
                         for (int j = 0; j < h; ++j)
                           ds[static_cast<std::size_t>(r) * h + j] +=
                               g[(static_cast<std::size_t>(r) * l + t) * h + j];
                   }
                 });
}

Tensor bmm_qk(const Tensor& q, const Tensor& enc) {
  if (q.ndim() != 2 || enc.ndim() != 3 || q.dim(0) != enc.dim(0) ||
      q.dim(1) != enc.dim(2))
    throw ShapeError("bmm_qk: incompatible " + shape_str(q.shape()) + " and " +
                     shape_str(enc.shape()));
  const int b = enc.dim(0), l = enc.dim(1), h = enc.dim(2);
  std::vector<double> out(static_cast<std::size_t>(b) * l, 0.0);
  for (int r = 0; r < b; ++r)
    for (int t = 0; t < l; ++t) {
      double acc = 0.0;
      for (int j = 0; j < h; ++j) acc += q.at(r, j) * enc.at(r, t, j);
      out[static_cast<std::size_t>(r) * l + t] = acc;
    }
  return make_op(
      {b, l}, std::move(out), {q, enc}, [b, l, h](detail::Node& o) {
        const double* g = o.grad.data();
        const double* pq = o.parents[0]->data.data();
        const double* pe = o.parents[1]->data.data();
        if (double* dq = parent_grad(o, 0))
          for (int r = 0; r < b; ++r)
            for (int t = 0; t < l; ++t) {
              const double gv = g[static_cast<std::size_t>(r) * l + t];
              const double* erow =
                  pe + (static_cast<std::size_t>(r) * l + t) * h;
              for (int j = 0; j < h; ++j)
                dq[static_cast<std::size_t>(r) * h + j] += gv * erow[j];
            }
        if (double* de = parent_grad(o, 1))
          for (int r = 0; r < b; ++r)
            for (int t = 0; t < l; ++t) {
              const double gv = g[static_cast<std::size_t>(r) * l + t];
              const double* qrow = pq + static_cast<std::size_t>(r) * h;
              double* drow = de + (static_cast<std::size_t>(r) * l + t) * h;
              for (int j = 0; j < h; ++j) drow[j] += gv * qrow[j];
            }
      });
}

Tensor bmm_av(const Tensor& w, const Tensor& enc) {
  if (w.ndim() != 2 || enc.ndim() != 3 || w.dim(0) != enc.dim(0) ||
      w.dim(1) != enc.dim(1))
    throw ShapeError("bmm_av: incompatible " + shape_str(w.shape()) + " and " +
                     shape_str(enc.shape()));
  const int b = enc.dim(0), l = enc.dim(1), h = enc.dim(2);
  std::vector<double> out(static_cast<std::size_t>(b) * h, 0.0);
  for (int r = 0; r < b; ++r)
    for (int t = 0; t < l; ++t) {
      const double wv = w.at(r, t);
      for (int j = 0; j < h; ++j)
        out[static_cast<std::size_t>(r) * h + j] += wv * enc.at(r, t, j);
    }
  return make_op(
      {b, h}, std::move(out), {w, enc}, [b, l, h](detail::Node& o) {
        const double* g = o.grad.data();
        const double* pw = o.parents[0]->data.data();
        const double* pe = o.parents[1]->data.data();
        if (double* dw = parent_grad(o, 0))
          for (int r = 0; r < b; ++r)
            for (int t = 0; t < l; ++t) {
              const double* erow =
                  pe + (static_cast<std::size_t>(r) * l + t) * h;
              const double* grow = g + static_cast<std::size_t>(r) * h;
              double acc = 0.0;
              for (int j = 0; j < h; ++j) acc += grow[j] * erow[j];
              dw[static_cast<std::size_t>(r) * l + t] += acc;
            }
        if (double* de = parent_grad(o, 1))
          for (int r = 0; r < b; ++r)
            for (int t = 0; t < l; ++t) {
              const double wv = pw[static_cast<std::size_t>(r) * l + t];
              const double* grow = g + static_cast<std::size_t>(r) * h;
              double* drow = de + (static_cast<std::size_t>(r) * l + t) * h;
              for (int j = 0; j < h; ++j) drow[j] += wv * grow[j];
            }
      });
}

// ---- convolution ----

Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  require_2d(x, "conv1d");
  if (kernel.ndim() != 3)
    throw ShapeError("conv1d: kernel must be [F,w,E], got " +
                     shape_str(kernel.shape()));
  const int t = x.dim(0), e = x.dim(1);
  const int f = kernel.dim(0), w = kernel.dim(1);
  if (kernel.dim(2) != e)
    throw ShapeError("conv1d: kernel depth " + shape_str(kernel.shape()) +
                     " vs input " + shape_str(x.shape()));
  if (bias.ndim() != 2 || bias.dim(0) != 1 || bias.dim(1) != f)
    throw ShapeError("conv1d: bias shape " + shape_str(bias.shape()));
  if (t < w)
    throw ShapeError("conv1d: input of " + std::to_string(t) +
                     " rows shorter than window " + std::to_string(w));
  const int to = t - w + 1;
  std::vector<double> out(static_cast<std::size_t>(to) * f);
  for (int i = 0; i < to; ++i)
    for (int fi = 0; fi < f; ++fi) {
      double acc = bias.data()[static_cast<std::size_t>(fi)];
      for (int j = 0; j < w; ++j)
        for (int c = 0; c < e; ++c)
          acc += x.at(i + j, c) * kernel.at(fi, j, c);
      out[static_cast<std::size_t>(i) * f + fi] = acc;
    }
  return make_op(
      {to, f}, std::move(out), {x, kernel, bias},
      [to, f, w, e](detail::Node& o) {
        const double* g = o.grad.data();
        const double* px = o.parents[0]->data.data();
        const double* pk = o.parents[1]->data.data();
        double* dx = parent_grad(o, 0);
        double* dk = parent_grad(o, 1);
        double* db = parent_grad(o, 2);
        for (int i = 0; i < to; ++i)
          for (int fi = 0; fi < f; ++fi) {
            const double gv = g[static_cast<std::size_t>(i) * f + fi];
            if (gv == 0.0) continue;
            if (db) db[fi] += gv;
            for (int j = 0; j < w; ++j)
              for (int c = 0; c < e; ++c) {
                const std::size_t xi =
                    static_cast<std::size_t>(i + j) * e + c;
                const std::size_t ki =
                    (static_cast<std::size_t>(fi) * w + j) * e + c;
                if (dx) dx[xi] += gv * pk[ki];
                if (dk) dk[ki] += gv * px[xi];
              }
          }
      });
}

// ---- gradient checking ----

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double step, double tol) {
  Tensor probe = Tensor::from(x.shape(), {x.data().begin(), x.data().end()},
                              true);
  Tensor out = f(probe);
  if (out.numel() != 1)
    throw ContractError("grad_check: f must be scalar-valued");
  out.backward();
  std::vector<double> analytic(probe.grad().begin(), probe.grad().end());

  GradCheckReport report;
  report.checked = analytic.size();
  std::vector<double> base(x.data().begin(), x.data().end());
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> hi = base, lo = base;
    hi[i] += step;
    lo[i] -= step;
    double fhi = f(Tensor::from(x.shape(), std::move(hi), false)).item();
    double flo = f(Tensor::from(x.shape(), std::move(lo), false)).item();
    double numeric = (fhi - flo) / (2.0 * step);
    double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    double rel = std::abs(analytic[i] - numeric) / denom;
    report.max_rel_err = std::max(report.max_rel_err, rel);
    if (rel > tol) report.failures.push_back({i, analytic[i], numeric, rel});
  }
  return report;
}

}  // namespace restyle
