#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace restyle {

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; doubles and draws are built explicitly
// here because std::*_distribution is implementation-defined and would break
// bit-reproducibility across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo,hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (second draw cached).
  double gaussian();

  // Uniform integer in [0,n).
  int uniform_int(int n);

  // Index drawn from a weight vector by inverse CDF (weights need not sum
  // to 1; they must be non-negative with a positive total).
  int multinomial(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent child seed from a root seed and a purpose tag, so
// data generation, parameter init, sampling etc. draw from separate streams.
std::uint64_t split_seed(std::uint64_t root, std::string_view tag);

}  // namespace restyle
