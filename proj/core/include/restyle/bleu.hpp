#pragma once

#include <span>
#include <vector>

namespace restyle {

// BLEU over token-id sequences: geometric mean of clipped n-gram precisions
// (orders 1..max_order) times a brevity penalty exp(1 - ref_len/cand_len)
// applied when the candidate is shorter than the reference.
//
// Sentence-level: add-1 smoothing on orders >= 2 (order-1 stays unsmoothed,
// so zero unigram overlap still scores 0). Short desk-scale outputs would
// otherwise score 0 almost surely at order 4 and starve the reward signal.
//
// Corpus-level: counts are aggregated over all pairs before combining, no
// smoothing (the standard reporting convention).
//
// An empty candidate scores 0; an empty reference is a contract violation.

double sentence_bleu(std::span<const int> candidate,
                     std::span<const int> reference, int max_order = 4);

double corpus_bleu(const std::vector<std::vector<int>>& candidates,
                   const std::vector<std::vector<int>>& references,
                   int max_order = 4);

}  // namespace restyle
