#include "restyle/bleu.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "restyle/errors.hpp"

namespace restyle {

namespace {

using Ngram = std::vector<int>;

// clipped matches and totals per order, accumulated into [max_order] arrays
void accumulate_counts(std::span<const int> cand, std::span<const int> ref,
                       int max_order, std::vector<std::int64_t>& matches,
                       std::vector<std::int64_t>& totals) {
  const int clen = static_cast<int>(cand.size());
  const int rlen = static_cast<int>(ref.size());
  for (int n = 1; n <= max_order; ++n) {
    const int cn = clen - n + 1;
    if (cn <= 0) continue;
    totals[static_cast<std::size_t>(n - 1)] += cn;
    std::map<Ngram, int> ref_counts;
    for (int i = 0; i + n <= rlen; ++i)
      ++ref_counts[Ngram(ref.begin() + i, ref.begin() + i + n)];
    std::map<Ngram, int> cand_counts;
    for (int i = 0; i + n <= clen; ++i)
      ++cand_counts[Ngram(cand.begin() + i, cand.begin() + i + n)];
    for (const auto& [gram, count] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end())
        matches[static_cast<std::size_t>(n - 1)] +=
            std::min(count, it->second);
    }
  }
}

double brevity_penalty(std::int64_t cand_len, std::int64_t ref_len) {
  if (cand_len >= ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) /
                            static_cast<double>(cand_len));
}

}  // namespace

double sentence_bleu(std::span<const int> candidate,
                     std::span<const int> reference, int max_order) {
  if (reference.empty()) throw ContractError("sentence_bleu: empty reference");
  if (max_order < 1) throw ContractError("sentence_bleu: max_order < 1");
  if (candidate.empty()) return 0.0;

  std::vector<std::int64_t> matches(static_cast<std::size_t>(max_order), 0);
  std::vector<std::int64_t> totals(static_cast<std::size_t>(max_order), 0);
  accumulate_counts(candidate, reference, max_order, matches, totals);

  if (matches[0] == 0) return 0.0;  // unsmoothed order 1 gates the score
  double log_precision = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const double m = static_cast<double>(matches[static_cast<std::size_t>(n - 1)]);
    const double t = static_cast<double>(totals[static_cast<std::size_t>(n - 1)]);
    double p;
    if (n == 1) {
      p = m / t;
    } else {
      p = (m + 1.0) / (t + 1.0);  // add-1 smoothing
    }
    log_precision += std::log(p);
  }
  return brevity_penalty(static_cast<std::int64_t>(candidate.size()),
                         static_cast<std::int64_t>(reference.size())) *
         std::exp(log_precision / max_order);
}

double corpus_bleu(const std::vector<std::vector<int>>& candidates,
                   const std::vector<std::vector<int>>& references,
                   int max_order) {
  if (candidates.size() != references.size())
    throw ContractError("corpus_bleu: candidate/reference count mismatch");
  if (candidates.empty()) throw ContractError("corpus_bleu: empty corpus");
  if (max_order < 1) throw ContractError("corpus_bleu: max_order < 1");

  std::vector<std::int64_t> matches(static_cast<std::size_t>(max_order), 0);
  std::vector<std::int64_t> totals(static_cast<std::size_t>(max_order), 0);
  std::int64_t cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty())
      throw ContractError("corpus_bleu: empty reference at index " +
                          std::to_string(i));
    cand_len += static_cast<std::int64_t>(candidates[i].size());
    ref_len += static_cast<std::int64_t>(references[i].size());
    accumulate_counts(candidates[i], references[i], max_order, matches,
                      totals);
  }
  if (cand_len == 0) return 0.0;

  double log_precision = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const std::int64_t m = matches[static_cast<std::size_t>(n - 1)];
    const std::int64_t t = totals[static_cast<std::size_t>(n - 1)];
    if (m == 0 || t == 0) return 0.0;
    log_precision +=
        std::log(static_cast<double>(m) / static_cast<double>(t));
  }
  return brevity_penalty(cand_len, ref_len) *
         std::exp(log_precision / max_order);
}

}  // namespace restyle
