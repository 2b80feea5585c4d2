#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "restyle/tensor.hpp"

namespace restyle {

// Self-describing binary container of named parameter tensors plus a
// vocabulary hash and a config echo. Doubles are stored as raw little-endian
// bits, so save/load round-trips bit-exactly.

struct TensorBlob {
  std::vector<int> shape;
  std::vector<double> data;
};

struct Checkpoint {
  std::uint64_t vocab_hash = 0;
  std::string config_json;
  std::vector<std::pair<std::string, TensorBlob>> tensors;

  const TensorBlob* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& params,
                     std::uint64_t vocab_hash, const std::string& config_json);

Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint values into existing parameter tensors. Verifies that
// every parameter is present with a matching shape, and that the vocabulary
// hash matches when one is expected.
void load_params(const Checkpoint& ckpt, std::vector<NamedTensor> params,
                 std::optional<std::uint64_t> expect_vocab_hash);

// In-memory parameter snapshots (phase-best tracking during training).
std::vector<std::vector<double>> snapshot_params(
    const std::vector<NamedTensor>& params);
void restore_params(std::vector<NamedTensor> params,
                    const std::vector<std::vector<double>>& snapshot);

// FNV-1a over the raw parameter bytes; equal hashes mean bit-equal values.
std::uint64_t params_hash(const std::vector<NamedTensor>& params);

}  // namespace restyle
