#include "restyle/rng.hpp"

#include <cmath>
#include <numbers>

#include "restyle/errors.hpp"

namespace restyle {

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw ContractError("Rng::uniform_int: n must be positive");
  // Rejection sampling keeps the draw unbiased and deterministic.
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

int Rng::multinomial(std::span<const double> weights) {
  if (weights.empty()) throw ContractError("Rng::multinomial: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractError("Rng::multinomial: negative weight");
    total += w;
  }
  if (total <= 0.0) throw ContractError("Rng::multinomial: zero total weight");
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

std::uint64_t split_seed(std::uint64_t root, std::string_view tag) {
  // FNV-1a over the tag, then a splitmix64 finalizer mixes in the root.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = root ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace restyle
