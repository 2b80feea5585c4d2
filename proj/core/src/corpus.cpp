#include "restyle/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "restyle/errors.hpp"
#include "restyle/rng.hpp"

namespace restyle {

std::string to_string(Direction d) {
  return d == Direction::LowToHigh ? "low2high" : "high2low";
}

Direction direction_from_string(const std::string& s) {
  if (s == "low2high") return Direction::LowToHigh;
  if (s == "high2low") return Direction::HighToLow;
  throw ConfigError("unknown direction '" + s +
                    "' (expected low2high or high2low)");
}

namespace {

void check_side(const std::vector<int>& ids, const char* side, int max_len) {
  if (ids.empty() || ids.back() != kEosId)
    throw InputError(std::string("ParallelPair: ") + side +
                     " must end with <eos>");
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    if (ids[i] == kPadId)
      throw InputError(std::string("ParallelPair: interior <pad> in ") + side);
  }
  if (static_cast<int>(ids.size()) > max_len)
    throw InputError(std::string("ParallelPair: ") + side + " length " +
                     std::to_string(ids.size()) + " exceeds max " +
                     std::to_string(max_len));
}

}  // namespace

ParallelPair make_pair(std::vector<int> src, std::vector<int> tgt,
                       Direction direction, int max_len) {
  check_side(src, "source", max_len);
  check_side(tgt, "target", max_len);
  return ParallelPair{std::move(src), std::move(tgt), direction};
}

ParallelPair oriented(const ParallelPair& p, Direction d) {
  if (d == Direction::LowToHigh) return p;
  return ParallelPair{p.tgt, p.src, Direction::HighToLow};
}

std::vector<Batch> make_batches(const std::vector<ParallelPair>& pairs,
                                int batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw ContractError("make_batches: batch_size < 1");
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    Batch b;
    int max_src = 0, max_tgt = 0;
    for (std::size_t i = start; i < end; ++i) {
      const auto& p = pairs[static_cast<std::size_t>(order[i])];
      max_src = std::max(max_src, static_cast<int>(p.src.size()));
      max_tgt = std::max(max_tgt, static_cast<int>(p.tgt.size()));
    }
    for (std::size_t i = start; i < end; ++i) {
      const auto& p = pairs[static_cast<std::size_t>(order[i])];
      std::vector<int> s = p.src;
      s.resize(static_cast<std::size_t>(max_src), kPadId);
      std::vector<int> t = p.tgt;
      t.resize(static_cast<std::size_t>(max_tgt), kPadId);
      b.src.push_back(std::move(s));
      b.src_len.push_back(static_cast<int>(p.src.size()));
      b.tgt.push_back(std::move(t));
      b.tgt_len.push_back(static_cast<int>(p.tgt.size()));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

SplitIndices split_indices(int n, int n_valid, int n_test,
                           std::uint64_t seed) {
  if (n_valid + n_test > n)
    throw ContractError("split_indices: splits exceed corpus size");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  SplitIndices s;
  s.valid.assign(order.begin(), order.begin() + n_valid);
  s.test.assign(order.begin() + n_valid, order.begin() + n_valid + n_test);
  s.train.assign(order.begin() + n_valid + n_test, order.end());
  return s;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_corpus: cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::vector<RawPair> load_parallel_text(const std::string& src_path,
                                        const std::string& tgt_path) {
  auto src_lines = read_lines(src_path);
  auto tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size())
    throw IoError("load_corpus: line count mismatch, " + src_path + " has " +
                  std::to_string(src_lines.size()) + " lines, " + tgt_path +
                  " has " + std::to_string(tgt_lines.size()));
  std::vector<RawPair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i)
    pairs.push_back({tokenize(src_lines[i]), tokenize(tgt_lines[i])});
  return pairs;
}

void save_parallel_text(const std::vector<RawPair>& pairs,
                        const std::string& src_path,
                        const std::string& tgt_path) {
  std::ofstream src(src_path), tgt(tgt_path);
  if (!src) throw IoError("save_corpus: cannot open " + src_path);
  if (!tgt) throw IoError("save_corpus: cannot open " + tgt_path);
  for (const auto& [s, t] : pairs) {
    src << detokenize(s) << '\n';
    tgt << detokenize(t) << '\n';
  }
  if (!src || !tgt) throw IoError("save_corpus: write failed");
}

std::vector<ParallelPair> encode_pairs(const std::vector<RawPair>& raw,
                                       const Vocabulary& vocab, int max_len,
                                       Direction direction) {
  std::vector<ParallelPair> out;
  out.reserve(raw.size());
  for (const auto& [s, t] : raw)
    out.push_back(
        make_pair(vocab.encode(s), vocab.encode(t), direction, max_len));
  return out;
}

}  // namespace restyle
