#include "crosswise/lexicon.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "crosswise/error.h"

namespace crosswise {

char value_class_char(ValueClass v) {
  static constexpr char kChars[] = {'B', 'M', 'E', 'S'};
  return kChars[static_cast<int>(v)];
}

EraLexicon::EraLexicon(int era, std::vector<Text> words, std::size_t max_ngram)
    : era_(era), max_ngram_(max_ngram), words_(std::move(words)) {
  if (max_ngram_ == 0) throw UsageError("max_ngram must be >= 1");
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  for (const Text& w : words_)
    if (w.empty() || w.size() > max_ngram_)
      throw DataError("lexicon word of length " + std::to_string(w.size()) + " outside [1, " +
                      std::to_string(max_ngram_) + "]");
  nodes_.emplace_back();
  for (std::size_t id = 0; id < words_.size(); ++id) {
    int node = 0;
    for (Char c : words_[id]) {
      int next = child(node, c);
      if (next < 0) {
        next = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        auto& kids = nodes_[node].children;
        kids.insert(std::upper_bound(kids.begin(), kids.end(), std::make_pair(c, 0),
                                     [](const auto& a, const auto& b) { return a.first < b.first; }),
                    {c, next});
      }
      node = next;
    }
    nodes_[node].word_id = static_cast<int>(id);
  }
}

int EraLexicon::child(int node, Char c) const {
  const auto& kids = nodes_[node].children;
  const auto it = std::lower_bound(kids.begin(), kids.end(), c,
                                   [](const std::pair<Char, int>& a, Char key) { return a.first < key; });
  return it != kids.end() && it->first == c ? it->second : -1;
}

int EraLexicon::word_id(std::u32string_view word) const {
  if (word.empty() || nodes_.empty()) return -1;
  int node = 0;
  for (Char c : word) {
    node = child(node, c);
    if (node < 0) return -1;
  }
  return nodes_[node].word_id;
}

std::string EraLexicon::serialize() const {
  std::string out;
  for (const Text& w : words_) {
    out += encode_utf8(w);
    out += '\n';
  }
  return out;
}

EraLexicon EraLexicon::deserialize(int era, std::string_view text, std::size_t max_ngram) {
  std::vector<Text> words;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      words.push_back(decode_utf8(line));
    } catch (const DataError& e) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return EraLexicon(era, std::move(words), max_ngram);
}

std::uint64_t EraLexicon::hash() const { return fnv1a64(serialize()); }

void EraLexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write lexicon " + path.string());
  out << serialize();
}

EraLexicon EraLexicon::load(const std::filesystem::path& path, int era, std::size_t max_ngram) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(era, buf.str(), max_ngram);
}

EraLexicon build_lexicon(const RawCorpus& corpus, int era, std::size_t ngram_min_count, std::size_t max_ngram) {
  if (ngram_min_count == 0) throw UsageError("ngram_min_count must be >= 1");
  std::vector<Text> words;
  std::map<Text, std::size_t> ngram_counts;
  for (const auto& s : corpus.sentences) {
    if (s.era != era) continue;
    for (const Text& w : s.words)
      if (w.size() <= max_ngram) words.push_back(w);
    const Text chars = joined_chars(s);
    for (std::size_t n = 2; n <= 3 && n <= max_ngram; ++n)
      for (std::size_t i = 0; i + n <= chars.size(); ++i) ++ngram_counts[chars.substr(i, n)];
  }
  for (const auto& [gram, count] : ngram_counts)
    if (count >= ngram_min_count) words.push_back(gram);
  return EraLexicon(era, std::move(words), max_ngram);
}

CandidateSet extract_candidates(std::u32string_view chars, const EraLexicon& lexicon, std::size_t max_ngram) {
  if (max_ngram == 0) throw UsageError("max_ngram must be >= 1");
  CandidateSet out(chars.size());
  for (std::size_t start = 0; start < chars.size(); ++start) {
    lexicon.match_prefixes(chars.substr(start), max_ngram, [&](std::size_t len, int id) {
      for (std::size_t i = start; i < start + len; ++i) {
        ValueClass v = ValueClass::M;
        if (len == 1)
          v = ValueClass::S;
        else if (i == start)
          v = ValueClass::B;
        else if (i + 1 == start + len)
          v = ValueClass::E;
        const Candidate cand{id, v};
        auto& list = out[i];
        if (std::find(list.begin(), list.end(), cand) == list.end()) list.push_back(cand);
      }
    });
  }
  return out;
}

std::string lexicon_file_name(int era) { return "era" + std::to_string(era) + ".dict"; }

}  // namespace crosswise
