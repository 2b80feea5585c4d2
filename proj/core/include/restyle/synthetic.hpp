#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restyle/corpus.hpp"

namespace restyle {

// Deterministic synthetic parallel style corpus. The low-style ("informal")
// side is sampled from templates; the high-style ("formal") side is derived
// by an invertible rule set: expand contractions (10-entry table), swap
// lexicon items (15 pairs, e.g. wanna -> want to), append a period. Informal
// marker tokens never survive into the formal side, so a perfect style
// classifier exists by construction.

// Contraction table: informal token triple (x ' y) -> formal expansion.
struct ContractionRule {
  std::vector<std::string> informal;  // e.g. {"don", "'", "t"}
  std::vector<std::string> formal;    // e.g. {"do", "not"}
};
const std::vector<ContractionRule>& contraction_table();

// Lexicon table: single informal token -> formal token sequence.
struct LexiconRule {
  std::string informal;
  std::vector<std::string> formal;
};
const std::vector<LexiconRule>& lexicon_table();

// informal -> formal (contractions, lexicon, trailing period).
std::vector<std::string> apply_style_rules(
    const std::vector<std::string>& informal);

// formal -> informal; exact inverse of apply_style_rules on generated text.
std::vector<std::string> invert_style_rules(
    const std::vector<std::string>& formal);

// Tokens that can only occur on the informal side.
bool is_informal_marker(const std::string& token);
const std::vector<std::string>& informal_marker_tokens();

// n_pairs (informal, formal) raw token pairs, a pure function of the seed.
std::vector<RawPair> gen_synthetic_corpus(std::uint64_t seed, int n_pairs,
                                          int max_len = 20);

// Partially formalized variants of the informal sides: formal cues (some
// expansions, trailing period) but at least one informal marker retained.
// Labeled low-style, they serve as hard negatives for classifier training so
// that a single leaked marker flips the verdict even in an otherwise formal
// sentence. Deterministic given the seed; pairs without a usable variant are
// skipped.
std::vector<std::vector<std::string>> hybrid_negatives(
    const std::vector<RawPair>& pairs, std::uint64_t seed);

}  // namespace restyle
