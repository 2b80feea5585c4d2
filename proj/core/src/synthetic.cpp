#include "restyle/synthetic.hpp"

#include <algorithm>
#include <unordered_set>

#include "restyle/errors.hpp"
#include "restyle/rng.hpp"

namespace restyle {

const std::vector<ContractionRule>& contraction_table() {
  static const std::vector<ContractionRule> table = {
      {{"don", "'", "t"}, {"do", "not"}},
      {{"can", "'", "t"}, {"cannot"}},
      {{"won", "'", "t"}, {"will", "not"}},
      {{"i", "'", "m"}, {"i", "am"}},
      {{"it", "'", "s"}, {"it", "is"}},
      {{"you", "'", "re"}, {"you", "are"}},
      {{"isn", "'", "t"}, {"is", "not"}},
      {{"didn", "'", "t"}, {"did", "not"}},
      {{"that", "'", "s"}, {"that", "is"}},
      {{"wasn", "'", "t"}, {"was", "not"}},
  };
  return table;
}

const std::vector<LexiconRule>& lexicon_table() {
  static const std::vector<LexiconRule> table = {
      {"wanna", {"want", "to"}},
      {"gonna", {"going", "to"}},
      {"gotta", {"have", "to"}},
      {"kinda", {"somewhat"}},
      {"sorta", {"rather"}},
      {"thx", {"thanks"}},
      {"pls", {"please"}},
      {"cuz", {"because"}},
      {"btw", {"incidentally"}},
      {"yeah", {"yes"}},
      {"nope", {"no"}},
      {"awesome", {"excellent"}},
      {"cool", {"impressive"}},
      {"stuff", {"things"}},
      {"folks", {"everyone"}},
  };
  return table;
}

std::vector<std::string> apply_style_rules(
    const std::vector<std::string>& informal) {
  std::vector<std::string> out;
  out.reserve(informal.size() + 4);
  const auto& contractions = contraction_table();
  const auto& lexicon = lexicon_table();
  std::size_t i = 0;
  while (i < informal.size()) {
    bool matched = false;
    if (i + 2 < informal.size() && informal[i + 1] == "'") {
      for (const auto& rule : contractions) {
        if (informal[i] == rule.informal[0] &&
            informal[i + 2] == rule.informal[2]) {
          out.insert(out.end(), rule.formal.begin(), rule.formal.end());
          i += 3;
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    for (const auto& rule : lexicon) {
      if (informal[i] == rule.informal) {
        out.insert(out.end(), rule.formal.begin(), rule.formal.end());
        ++i;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(informal[i]);
      ++i;
    }
  }
  out.push_back(".");
  return out;
}

std::vector<std::string> invert_style_rules(
    const std::vector<std::string>& formal) {
  std::vector<std::string> work = formal;
  if (!work.empty() && work.back() == ".") work.pop_back();

  const auto& contractions = contraction_table();
  const auto& lexicon = lexicon_table();
  std::vector<std::string> out;
  out.reserve(work.size() + 4);
  std::size_t i = 0;
  while (i < work.size()) {
    bool matched = false;
    // multi-token formal sequences first, longest match wins
    for (const auto& rule : contractions) {
      const auto& f = rule.formal;
      if (i + f.size() <= work.size() &&
          std::equal(f.begin(), f.end(), work.begin() + static_cast<long>(i))) {
        // "it is not" must parse as it + is-not, never as it-is + not:
        // a bare "not" only ever comes from a negation expansion, so a
        // copula match that would orphan one is always wrong.
        const bool has_not = std::find(f.begin(), f.end(), "not") != f.end();
        if (!has_not && i + f.size() < work.size() &&
            work[i + f.size()] == "not")
          continue;
        out.insert(out.end(), rule.informal.begin(), rule.informal.end());
        i += f.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (const auto& rule : lexicon) {
      const auto& f = rule.formal;
      if (i + f.size() <= work.size() &&
          std::equal(f.begin(), f.end(), work.begin() + static_cast<long>(i))) {
        out.push_back(rule.informal);
        i += f.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(work[i]);
      ++i;
    }
  }
  return out;
}

const std::vector<std::string>& informal_marker_tokens() {
  static const std::vector<std::string> markers = [] {
    std::vector<std::string> m;
    for (const auto& rule : lexicon_table()) m.push_back(rule.informal);
    // contraction stems that exist only inside informal contractions
    for (const char* stem : {"don", "can", "won", "isn", "didn", "wasn"})
      m.push_back(stem);
    m.push_back("'");
    return m;
  }();
  return markers;
}

bool is_informal_marker(const std::string& token) {
  const auto& m = informal_marker_tokens();
  return std::find(m.begin(), m.end(), token) != m.end();
}

namespace {

// Content pools. These deliberately avoid every token that appears on the
// formal side of a rule (am/is/are/not/to/do/did/was/will/have/want/going,
// thanks/please/yes/no/...), which keeps the rule set invertible on all
// generated sentences. Sized so that 2K training pairs cannot memorize the
// template cross-product: a 10-epoch cross-entropy model is left with
// visible style mistakes for the reward phases to repair.
const std::vector<std::vector<std::string>> kSubjects = {
    {"i"},          {"we"},           {"they"},
    {"he"},         {"she"},          {"my", "friend"},
    {"the", "team"}, {"the", "band"}, {"the", "crew"},
    {"my", "sister"}, {"his", "brother"}, {"the", "manager"},
    {"the", "kids"}, {"our", "neighbor"}};
const std::vector<std::string> kPastVerbs = {
    "watched",  "liked",   "visited", "bought",   "tried",  "enjoyed",
    "played",   "finished", "joined",  "missed",   "booked", "cancelled",
    "reviewed", "skipped", "planned", "attended"};
const std::vector<std::string> kBaseVerbs = {
    "see",  "watch", "try",   "visit", "join",  "play",
    "buy",  "read",  "skip",  "book",  "check", "attend"};
const std::vector<std::vector<std::string>> kObjects = {
    {"the", "movie"},   {"the", "game"},    {"the", "show"},
    {"the", "park"},    {"the", "concert"}, {"the", "beach"},
    {"the", "museum"},  {"the", "match"},   {"the", "book"},
    {"the", "garden"},  {"the", "market"},  {"the", "festival"},
    {"the", "lecture"}, {"the", "studio"},  {"the", "bakery"},
    {"the", "harbor"}};
const std::vector<std::string> kAdjectives = {
    "great", "fun",   "boring", "long",    "weird",  "nice",  "loud",
    "quiet", "slow",  "busy",   "crowded", "bright", "messy", "tiny"};
// marker adjectives: rewritten by the lexicon rules
const std::vector<std::string> kMarkerAdjectives = {"awesome", "cool"};
const std::vector<std::string> kAdverbs = {"really", "totally", "definitely",
                                           "probably", "very", "surprisingly"};
const std::vector<std::vector<std::string>> kTimes = {
    {"yesterday"},        {"today"},          {"again"},
    {"soon"},             {"last", "week"},   {"this", "morning"},
    {"on", "sunday"},     {"after", "lunch"}, {"tonight"}};
const std::vector<std::string> kOpeners = {"btw", "yeah", "nope", "listen",
                                           "ok", "so"};

// 1/(rank+1) weights make low-ranked rules rare, so a model trained briefly
// with cross entropy alone leaves visible style headroom.
std::vector<double> zipf_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
  return w;
}

class SentenceSampler {
 public:
  explicit SentenceSampler(Rng& rng) : rng_(rng) {}

  std::vector<std::string> sample() {
    std::vector<std::string> s;
    maybe_opener(s);
    clause(s);
    const double extra = rng_.uniform();
    if (extra < 0.22) {
      s.push_back("cuz");
      clause(s);
    } else if (extra < 0.40) {
      s.push_back(rng_.uniform() < 0.5 ? "and" : "but");
      clause(s);
    }
    maybe_tail(s);
    return s;
  }

 private:
  Rng& rng_;

  template <typename T>
  const T& pick(const std::vector<T>& pool) {
    return pool[static_cast<std::size_t>(
        rng_.uniform_int(static_cast<int>(pool.size())))];
  }

  template <typename T>
  const T& pick_zipf(const std::vector<T>& pool) {
    std::vector<double> weights = zipf_weights(pool.size());
    return pool[static_cast<std::size_t>(rng_.multinomial(weights))];
  }

  void append(std::vector<std::string>& s, const std::vector<std::string>& w) {
    s.insert(s.end(), w.begin(), w.end());
  }

  void maybe_opener(std::vector<std::string>& s) {
    if (rng_.uniform() < 0.30) s.push_back(pick_zipf(kOpeners));
  }

  void maybe_time(std::vector<std::string>& s) {
    if (rng_.uniform() < 0.35) append(s, pick(kTimes));
  }

  void maybe_tail(std::vector<std::string>& s) {
    if (rng_.uniform() < 0.15) {
      s.push_back("and");
      s.push_back("stuff");
    }
  }

  std::string adjective() {
    if (rng_.uniform() < 0.30) return pick_zipf(kMarkerAdjectives);
    return pick(kAdjectives);
  }

  void clause(std::vector<std::string>& s) {
    const double kind = rng_.uniform();
    if (kind < 0.20) {
      plain(s);
    } else if (kind < 0.42) {
      lexicon_verb(s);
    } else if (kind < 0.62) {
      contraction_copula(s);
    } else if (kind < 0.82) {
      contraction_negation(s);
    } else if (kind < 0.92) {
      request(s);
    } else {
      looked(s);
    }
  }

  void plain(std::vector<std::string>& s) {
    append(s, pick(kSubjects));
    s.push_back(pick(kPastVerbs));
    append(s, pick(kObjects));
    maybe_time(s);
  }

  void lexicon_verb(std::vector<std::string>& s) {
    append(s, pick(kSubjects));
    static const std::vector<std::string> lexv = {"wanna", "gonna", "gotta"};
    s.push_back(pick_zipf(lexv));
    s.push_back(pick(kBaseVerbs));
    append(s, pick(kObjects));
    maybe_time(s);
  }

  void contraction_copula(std::vector<std::string>& s) {
    const int which = rng_.uniform_int(4);
    if (which == 0) {
      append(s, {"i", "'", "m"});
    } else if (which == 1) {
      append(s, {"it", "'", "s"});
    } else if (which == 2) {
      append(s, {"that", "'", "s"});
    } else {
      append(s, {"you", "'", "re"});
    }
    if (rng_.uniform() < 0.4) {
      if (rng_.uniform() < 0.5) {
        static const std::vector<std::string> deg = {"kinda", "sorta"};
        s.push_back(pick_zipf(deg));
      } else {
        s.push_back(pick(kAdverbs));
      }
    }
    s.push_back(adjective());
  }

  void contraction_negation(std::vector<std::string>& s) {
    const int which = rng_.uniform_int(6);
    if (which == 0) {
      append(s, {"don", "'", "t"});
      s.push_back(pick(kBaseVerbs));
      append(s, pick(kObjects));
    } else if (which == 1) {
      append(s, pick(kSubjects));
      append(s, {"can", "'", "t"});
      s.push_back(pick(kBaseVerbs));
      append(s, pick(kObjects));
    } else if (which == 2) {
      append(s, pick(kSubjects));
      append(s, {"won", "'", "t"});
      s.push_back(pick(kBaseVerbs));
      append(s, pick(kObjects));
    } else if (which == 3) {
      append(s, pick(kSubjects));
      append(s, {"didn", "'", "t"});
      s.push_back(pick(kBaseVerbs));
      append(s, pick(kObjects));
    } else if (which == 4) {
      append(s, {"it", "isn", "'", "t"});
      s.push_back(adjective());
    } else {
      append(s, {"it", "wasn", "'", "t"});
      s.push_back(adjective());
    }
  }

  void request(std::vector<std::string>& s) {
    const int which = rng_.uniform_int(3);
    if (which == 0) {
      s.push_back("pls");
      s.push_back(pick(kBaseVerbs));
      append(s, pick(kObjects));
    } else if (which == 1) {
      s.push_back("thx");
      s.push_back("for");
      append(s, pick(kObjects));
    } else {
      s.push_back("pls");
      s.push_back(pick(kBaseVerbs));
      append(s, pick(kObjects));
      static const std::vector<std::string> when = {"soon", "today"};
      s.push_back(pick(when));
    }
  }

  void looked(std::vector<std::string>& s) {
    append(s, pick(kObjects));
    s.push_back("looked");
    if (rng_.uniform() < 0.5) {
      static const std::vector<std::string> deg = {"kinda", "sorta", "really"};
      s.push_back(pick_zipf(deg));
    }
    s.push_back(adjective());
  }
};

}  // namespace

std::vector<RawPair> gen_synthetic_corpus(std::uint64_t seed, int n_pairs,
                                          int max_len) {
  if (n_pairs < 1) throw InputError("gen_synthetic_corpus: n_pairs must be >= 1");
  Rng rng(split_seed(seed, "synthetic-corpus"));
  SentenceSampler sampler(rng);
  std::vector<RawPair> pairs;
  pairs.reserve(static_cast<std::size_t>(n_pairs));
  while (static_cast<int>(pairs.size()) < n_pairs) {
    std::vector<std::string> informal = sampler.sample();
    std::vector<std::string> formal = apply_style_rules(informal);
    // +1 accounts for <eos> added at encode time
    if (static_cast<int>(informal.size()) + 1 > max_len ||
        static_cast<int>(formal.size()) + 1 > max_len)
      continue;
    pairs.push_back({std::move(informal), std::move(formal)});
  }
  return pairs;
}

std::vector<std::vector<std::string>> hybrid_negatives(
    const std::vector<RawPair>& pairs, std::uint64_t seed) {
  Rng rng(split_seed(seed, "hybrid-negatives"));
  const auto& contractions = contraction_table();
  const auto& lexicon = lexicon_table();

  std::vector<std::vector<std::string>> out;
  for (const auto& [informal, formal] : pairs) {
    std::vector<std::string> hybrid;
    hybrid.reserve(informal.size() + 4);
    std::size_t i = 0;
    while (i < informal.size()) {
      bool matched = false;
      if (i + 2 < informal.size() && informal[i + 1] == "'") {
        for (const auto& rule : contractions) {
          if (informal[i] == rule.informal[0] &&
              informal[i + 2] == rule.informal[2]) {
            if (rng.uniform() < 0.5) {
              hybrid.insert(hybrid.end(), rule.formal.begin(),
                            rule.formal.end());
            } else {
              hybrid.insert(hybrid.end(), rule.informal.begin(),
                            rule.informal.end());
            }
            i += 3;
            matched = true;
            break;
          }
        }
      }
      if (matched) continue;
      for (const auto& rule : lexicon) {
        if (informal[i] == rule.informal) {
          if (rng.uniform() < 0.5) {
            hybrid.insert(hybrid.end(), rule.formal.begin(), rule.formal.end());
          } else {
            hybrid.push_back(rule.informal);
          }
          ++i;
          matched = true;
          break;
        }
      }
      if (!matched) {
        hybrid.push_back(informal[i]);
        ++i;
      }
    }
    hybrid.push_back(".");

    bool keeps_marker = false;
    for (const auto& tok : hybrid)
      if (is_informal_marker(tok)) keeps_marker = true;
    if (keeps_marker) out.push_back(std::move(hybrid));
  }
  return out;
}

}  // namespace restyle
