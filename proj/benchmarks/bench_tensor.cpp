#include <benchmark/benchmark.h>

#include "restyle/rng.hpp"
#include "restyle/tensor.hpp"

using namespace restyle;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, bool rg = false) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.uniform(-1.0, 1.0);
  return Tensor::from(std::move(shape), std::move(data), rg);
}

void BM_MatmulForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Tensor a = random_tensor({n, n}, rng);
  Tensor b = random_tensor({n, n}, rng);
  NoGradGuard no_grad;
  for (auto _ : state) {
    Tensor c = matmul(a, b);
    benchmark::DoNotOptimize(c.data().data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_MatmulForward)->Arg(32)->Arg(64)->Arg(128);

void BM_MatmulBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Tensor a = random_tensor({n, n}, rng, true);
  Tensor b = random_tensor({n, n}, rng, true);
  for (auto _ : state) {
    Tensor loss = sum(matmul(a, b));
    loss.backward();
    a.zero_grad();
    b.zero_grad();
  }
  state.SetItemsProcessed(state.iterations() * 6LL * n * n * n);
}
BENCHMARK(BM_MatmulBackward)->Arg(32)->Arg(64);

void BM_SoftmaxRows(benchmark::State& state) {
  Rng rng(2);
  Tensor x = random_tensor({64, 200}, rng);
  NoGradGuard no_grad;
  for (auto _ : state) {
    Tensor y = softmax(x, 1);
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_SoftmaxRows);

}  // namespace

BENCHMARK_MAIN();
