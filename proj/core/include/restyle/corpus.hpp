#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restyle/types.hpp"
#include "restyle/vocab.hpp"

namespace restyle {

// One aligned sentence pair. `src` is the style-s1 side, `tgt` the style-s2
// side; both end with <eos> and contain no interior <pad>.
struct ParallelPair {
  std::vector<int> src;
  std::vector<int> tgt;
  Direction direction = Direction::LowToHigh;
};

// Validates the ParallelPair invariants; throws InputError on violation.
ParallelPair make_pair(std::vector<int> src, std::vector<int> tgt,
                       Direction direction, int max_len);

// Returns the pair oriented for a transfer direction: LowToHigh keeps the
// canonical (low, high) order, HighToLow swaps the sides.
ParallelPair oriented(const ParallelPair& p, Direction d);

// Padded minibatch. Rows are sentences; padding (id 0) only after <eos>.
struct Batch {
  std::vector<std::vector<int>> src;  // [B][max_src]
  std::vector<int> src_len;
  std::vector<std::vector<int>> tgt;  // [B][max_tgt]
  std::vector<int> tgt_len;
  int size() const { return static_cast<int>(src.size()); }
  int max_src() const { return src.empty() ? 0 : static_cast<int>(src[0].size()); }
  int max_tgt() const { return tgt.empty() ? 0 : static_cast<int>(tgt[0].size()); }
};

// Seeded shuffle, fixed-size groups, final short batch kept.
std::vector<Batch> make_batches(const std::vector<ParallelPair>& pairs,
                                int batch_size, std::uint64_t seed);

// Pairwise-disjoint, exhaustive index partition after a seeded shuffle.
struct SplitIndices {
  std::vector<int> train, valid, test;
};
SplitIndices split_indices(int n, int n_valid, int n_test, std::uint64_t seed);

// Token-text parallel corpus I/O. One sentence per line; line i of the two
// files forms pair i. Loading tokenizes; saving writes space-joined tokens,
// so save(load(x)) round-trips exactly on normalized text.
using RawPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

std::vector<RawPair> load_parallel_text(const std::string& src_path,
                                        const std::string& tgt_path);
void save_parallel_text(const std::vector<RawPair>& pairs,
                        const std::string& src_path,
                        const std::string& tgt_path);

// Encodes raw token pairs with a vocabulary (appends <eos>, checks bounds).
std::vector<ParallelPair> encode_pairs(const std::vector<RawPair>& raw,
                                       const Vocabulary& vocab, int max_len,
                                       Direction direction);

}  // namespace restyle
