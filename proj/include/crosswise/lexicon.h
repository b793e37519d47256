#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crosswise/corpus.h"

namespace crosswise {

inline constexpr std::size_t kDefaultMaxNgram = 5;

// Position of a character inside a matched dictionary word.
enum class ValueClass : std::uint8_t { B = 0, M = 1, E = 2, S = 3 };
inline constexpr int kNumValueClasses = 4;

char value_class_char(ValueClass v);

struct Candidate {
  int word_id = 0;
  ValueClass value = ValueClass::S;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// candidates[i] lists the dictionary words covering character i, ordered by
// match start then length.
using CandidateSet = std::vector<std::vector<Candidate>>;

// Dictionary of one era. Word ids are dense and follow code point order.
class EraLexicon {
 public:
  EraLexicon() = default;
  EraLexicon(int era, std::vector<Text> words, std::size_t max_ngram = kDefaultMaxNgram);

  int era() const { return era_; }
  std::size_t size() const { return words_.size(); }
  std::size_t max_ngram() const { return max_ngram_; }
  const std::vector<Text>& words() const { return words_; }
  // -1 when absent.
  int word_id(std::u32string_view word) const;
  bool contains(std::u32string_view word) const { return word_id(word) >= 0; }

  // Calls visit(length, word_id) for each dictionary word that is a prefix
  // of `text`, shortest first, up to `max_len` chars.
  template <typename Visit>
  void match_prefixes(std::u32string_view text, std::size_t max_len, Visit&& visit) const {
    int node = 0;
    for (std::size_t k = 0; k < text.size() && k < max_len; ++k) {
      node = child(node, text[k]);
      if (node < 0) return;
      if (nodes_[node].word_id >= 0) visit(k + 1, nodes_[node].word_id);
    }
  }

  // One word per line, UTF-8, sorted.
  std::string serialize() const;
  static EraLexicon deserialize(int era, std::string_view text, std::size_t max_ngram = kDefaultMaxNgram);
  std::uint64_t hash() const;
  void save(const std::filesystem::path& path) const;
  static EraLexicon load(const std::filesystem::path& path, int era, std::size_t max_ngram = kDefaultMaxNgram);

 private:
  struct Node {
    std::vector<std::pair<Char, int>> children;  // sorted by char
    int word_id = -1;
  };
  int child(int node, Char c) const;

  int era_ = 0;
  std::size_t max_ngram_ = kDefaultMaxNgram;
  std::vector<Text> words_;
  std::vector<Node> nodes_;
};

// Word types of the sentences labelled `era` plus every character bigram and
// trigram seen at least `ngram_min_count` times in them.
EraLexicon build_lexicon(const RawCorpus& corpus, int era, std::size_t ngram_min_count,
                         std::size_t max_ngram = kDefaultMaxNgram);

CandidateSet extract_candidates(std::u32string_view chars, const EraLexicon& lexicon, std::size_t max_ngram);

std::string lexicon_file_name(int era);

}  // namespace crosswise
