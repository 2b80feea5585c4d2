#include "restyle/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "restyle/errors.hpp"

namespace restyle {

namespace {

const char* kReserved[4] = {"<pad>", "<unk>", "<bos>", "<eos>"};

bool is_split_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == '\'' ||
         c == '"';
}

}  // namespace

std::vector<std::string> tokenize(const std::string& line) {
  std::string spaced;
  spaced.reserve(line.size() * 2);
  for (char c : line) {
    if (is_split_punct(c)) {
      spaced.push_back(' ');
      spaced.push_back(c);
      spaced.push_back(' ');
    } else {
      spaced.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    }
  }
  std::vector<std::string> tokens;
  std::istringstream is(spaced);
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* r : kReserved) {
    index_[r] = static_cast<int>(tokens_.size());
    tokens_.push_back(r);
  }
}

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& corpus, int min_freq) {
  if (corpus.empty()) throw InputError("build_vocab: empty corpus");
  std::unordered_map<std::string, int> freq;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++freq[tok];
  std::vector<std::pair<std::string, int>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [tok, f] : items) {
    if (f < min_freq) continue;
    if (v.index_.count(tok)) continue;  // reserved literal in corpus
    v.index_[tok] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(
    const std::vector<std::string>& non_reserved) {
  Vocabulary v;
  for (const auto& tok : non_reserved) {
    if (v.index_.count(tok))
      throw InputError("Vocabulary: duplicate token '" + tok + "'");
    v.index_[tok] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(tok);
  }
  return v;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size())
    throw ContractError("Vocabulary: id " + std::to_string(id) +
                        " out of range (size " + std::to_string(size()) + ")");
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.count(token) > 0;
}

std::vector<int> Vocabulary::encode(
    std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& t : tokens) ids.push_back(id_of(t));
  ids.push_back(kEosId);
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> tokens;
  for (int id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    tokens.push_back(token_of(id));
  }
  return tokens;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& tok : tokens_) {
    for (char c : tok) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 1099511628211ULL;
  }
  return h;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("vocab save: cannot open " + path);
  for (const auto& tok : tokens_) os << tok << '\n';
  if (!os) throw IoError("vocab save: write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("vocab load: cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  if (lines.size() < 4)
    throw IoError("vocab load: " + path + " has fewer than 4 lines");
  for (int i = 0; i < 4; ++i) {
    if (lines[static_cast<std::size_t>(i)] != kReserved[i])
      throw IoError("vocab load: " + path + " line " + std::to_string(i + 1) +
                    " must be " + kReserved[i]);
  }
  return from_tokens({lines.begin() + 4, lines.end()});
}

}  // namespace restyle
