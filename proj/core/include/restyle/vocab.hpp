#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace restyle {

// Reserved token ids; fixed regardless of corpus.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;

// Lowercases ASCII, splits the punctuation set {. , ! ? ' "} into standalone
// tokens, then splits on whitespace.
std::vector<std::string> tokenize(const std::string& line);

// Inverse of tokenize for already-normalized text: joins with single spaces.
std::string detokenize(std::span<const std::string> tokens);

class Vocabulary {
 public:
  Vocabulary();

  // Tokens with frequency >= min_freq, ordered by (freq desc, token asc);
  // everything else maps to <unk>. Throws InputError on an empty corpus.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          int min_freq);

  static Vocabulary from_tokens(const std::vector<std::string>& non_reserved);

  int id_of(const std::string& token) const;  // kUnkId when absent
  const std::string& token_of(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  // Encodes a token list, appending <eos>.
  std::vector<int> encode(std::span<const std::string> tokens) const;
  // Decodes ids, dropping reserved symbols.
  std::vector<std::string> decode(std::span<const int> ids) const;

  // FNV-1a over all tokens; checkpoint files embed this so a model is never
  // silently paired with the wrong vocabulary.
  std::uint64_t hash() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;  // index == id, reserved ids 0..3
  std::unordered_map<std::string, int> index_;
};

}  // namespace restyle
