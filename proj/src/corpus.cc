#include "crosswise/corpus.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "crosswise/error.h"

namespace crosswise {

char tag_char(Tag t) {
  static constexpr char kChars[] = {'B', 'M', 'E', 'S'};
  return kChars[static_cast<int>(t)];
}

Text decode_utf8(std::string_view bytes) {
  Text out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  auto fail = [&](const char* why) {
    throw DataError("malformed UTF-8 at byte " + std::to_string(i) + ": " + why);
  };
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    Char cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      fail("invalid lead byte");
    }
    if (i + len > bytes.size()) fail("truncated sequence");
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) fail("invalid continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr Char kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len]) fail("overlong encoding");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid code point");
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 3);
  for (Char c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::vector<Tag> words_to_bmes(std::span<const Text> words) {
  if (words.empty()) throw DataError("empty sentence");
  std::vector<Tag> tags;
  for (const Text& w : words) {
    if (w.empty()) throw DataError("empty word");
    if (w.size() == 1) {
      tags.push_back(Tag::S);
      continue;
    }
    tags.push_back(Tag::B);
    for (std::size_t k = 1; k + 1 < w.size(); ++k) tags.push_back(Tag::M);
    tags.push_back(Tag::E);
  }
  return tags;
}

std::vector<Text> bmes_to_words(std::u32string_view chars, std::span<const Tag> tags) {
  if (chars.size() != tags.size())
    throw DataError("bmes_to_words: " + std::to_string(chars.size()) + " chars but " +
                    std::to_string(tags.size()) + " tags");
  std::vector<Text> words;
  Text current;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const Tag t = tags[i];
    if ((t == Tag::B || t == Tag::S) && !current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
    current.push_back(chars[i]);
    if (t == Tag::E || t == Tag::S) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

bool tags_well_formed(std::span<const Tag> tags) {
  bool open = false;  // inside a multi-char word
  for (Tag t : tags) {
    const bool starts = t == Tag::B || t == Tag::S;
    if (starts == open) return false;
    open = t == Tag::B || t == Tag::M;
  }
  return !open;
}

bool is_space_char(Char c) {
  return c == U' ' || c == U'\t' || c == U'\r' || c == U'\n' || c == U'\v' || c == U'\f' || c == 0xA0 ||
         c == 0x3000 || (c >= 0x2000 && c <= 0x200B) || c == 0xFEFF;
}

namespace {

bool is_latin(Char c) {
  return (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') ||
         (c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7) || (c >= 0xFF21 && c <= 0xFF3A) ||
         (c >= 0xFF41 && c <= 0xFF5A);
}

bool is_digit(Char c) { return (c >= U'0' && c <= U'9') || (c >= 0xFF10 && c <= 0xFF19); }

}  // namespace

bool is_punct_char(Char c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  return (c >= 0xA1 && c <= 0xBF) || (c >= 0x2010 && c <= 0x206F) || (c >= 0x3001 && c <= 0x303F) ||
         (c >= 0xFE10 && c <= 0xFE19) || (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

PreprocessedText preprocess_aligned(std::u32string_view text) {
  PreprocessedText out;
  std::size_t i = 0;
  while (i < text.size()) {
    const Char c = text[i];
    if (is_space_char(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    Char mapped = c;
    if (is_latin(c)) {
      while (j < text.size() && is_latin(text[j])) ++j;
      mapped = kLatinToken;
    } else if (is_digit(c)) {
      while (j < text.size() && is_digit(text[j])) ++j;
      mapped = kNumberToken;
    } else if (is_punct_char(c)) {
      mapped = kPunctToken;
    }
    out.chars.push_back(mapped);
    out.source_spans.emplace_back(i, j);
    i = j;
  }
  return out;
}

Text preprocess(std::u32string_view text) { return preprocess_aligned(text).chars; }

std::string preprocess(std::string_view utf8) { return encode_utf8(preprocess(decode_utf8(utf8))); }

std::size_t RawCorpus::word_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.words.size();
  return n;
}

Text joined_chars(const RawSentence& sentence) {
  Text out;
  for (const Text& w : sentence.words) out += w;
  return out;
}

LabeledSentence to_labeled(const RawSentence& sentence) {
  return LabeledSentence{joined_chars(sentence), words_to_bmes(sentence.words), sentence.era};
}

std::vector<RawSentence> split_long(const RawSentence& sentence, std::size_t max_len) {
  std::vector<RawSentence> out;
  std::size_t begin = 0;
  const auto& words = sentence.words;
  while (begin < words.size()) {
    std::size_t len = 0, end = begin, last_punct = 0;
    while (end < words.size() && len + words[end].size() <= max_len) {
      len += words[end].size();
      ++end;
      if (words[end - 1] == Text(1, kPunctToken)) last_punct = end;
    }
    if (end == words.size()) {
      // remainder fits
    } else if (end == begin) {
      end = begin + 1;  // a single word longer than max_len is kept whole
    } else if (last_punct > begin) {
      end = last_punct;
    }
    RawSentence piece{{words.begin() + begin, words.begin() + end}, sentence.era};
    out.push_back(std::move(piece));
    begin = end;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> split_text(std::u32string_view chars, std::size_t max_len) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  while (begin < chars.size()) {
    std::size_t end = std::min(chars.size(), begin + max_len);
    if (end < chars.size()) {
      for (std::size_t k = end; k > begin; --k)
        if (chars[k - 1] == kPunctToken) {
          end = k;
          break;
        }
    }
    out.emplace_back(begin, end);
    begin = end;
  }
  return out;
}

RawCorpus parse_corpus(std::string_view contents, int era, std::string source_name, std::size_t max_len) {
  RawCorpus corpus;
  corpus.source_name = std::move(source_name);
  std::size_t line_no = 0, pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    Text decoded;
    try {
      decoded = decode_utf8(line);
    } catch (const DataError& e) {
      throw DataError(corpus.source_name + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    RawSentence sentence;
    sentence.era = era;
    std::size_t start = 0;
    while (start <= decoded.size()) {
      std::size_t sp = decoded.find(U' ', start);
      if (sp == Text::npos) sp = decoded.size();
      Text word = preprocess(std::u32string_view(decoded).substr(start, sp - start));
      if (!word.empty()) sentence.words.push_back(std::move(word));
      start = sp + 1;
    }
    if (sentence.words.empty()) continue;
    for (auto& piece : split_long(sentence, max_len)) corpus.sentences.push_back(std::move(piece));
  }
  return corpus;
}

RawCorpus load_corpus(const std::filesystem::path& path, int era, std::size_t max_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), era, path.string(), max_len);
}

void write_corpus(const RawCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : corpus.sentences) {
    for (std::size_t k = 0; k < s.words.size(); ++k) {
      if (k) out << ' ';
      out << encode_utf8(s.words[k]);
    }
    out << '\n';
  }
}

namespace {

class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += 1.0 / static_cast<double>(r + 1);
      cumulative_.push_back(acc);
    }
  }
  template <typename Rng>
  std::size_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, cumulative_.back());
    const double x = u(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

constexpr Char kAlphabetBase = 0x4E00;
constexpr std::size_t kAlphabetSize = 160;

}  // namespace

SyntheticCorpus make_synthetic_corpus(std::uint64_t seed, std::size_t n_train, std::size_t n_test) {
  if (n_train == 0 || n_test == 0) throw UsageError("synthetic corpus needs n_train, n_test >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_char(0, kAlphabetSize - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::set<Text> taken;
  auto fresh_word = [&](std::size_t len) {
    for (;;) {
      Text w;
      for (std::size_t k = 0; k < len; ++k) w.push_back(kAlphabetBase + static_cast<Char>(pick_char(rng)));
      if (taken.insert(w).second) return w;
    }
  };
  auto random_length = [&] {
    const double r = coin(rng);
    return r < 0.15 ? 1 : r < 0.70 ? 2 : r < 0.95 ? 3 : 4;
  };
  auto make_types = [&](std::size_t n) {
    std::vector<Text> types;
    for (std::size_t k = 0; k < n; ++k) types.push_back(fresh_word(random_length()));
    return types;
  };

  std::vector<Text> ambiguous;
  for (int k = 0; k < 25; ++k) ambiguous.push_back(fresh_word(2));
  const std::vector<Text> shared = make_types(150);
  const std::vector<Text> era_types[2] = {make_types(250), make_types(250)};
  const std::vector<Text> held_out[2] = {make_types(40), make_types(40)};
  const ZipfSampler zipf_shared(shared.size()), zipf_era(era_types[0].size()), zipf_held(held_out[0].size());
  const Char markers[2] = {kEraMarker0, kEraMarker1};

  auto make_sentence = [&](int era, bool test) {
    RawSentence s;
    s.era = era;
    std::uniform_int_distribution<int> n_words(5, 12);
    const int n = n_words(rng);
    for (int k = 0; k < n; ++k) {
      if (coin(rng) < 0.2) {
        const Text& pair = ambiguous[std::uniform_int_distribution<std::size_t>(0, ambiguous.size() - 1)(rng)];
        if (era == 0) {
          s.words.push_back(pair);
        } else {
          s.words.push_back(pair.substr(0, 1));
          s.words.push_back(pair.substr(1, 1));
        }
      } else if (test && coin(rng) < 0.06) {
        s.words.push_back(held_out[era][zipf_held(rng)]);
      } else if (coin(rng) < 0.5) {
        s.words.push_back(shared[zipf_shared(rng)]);
      } else {
        s.words.push_back(era_types[era][zipf_era(rng)]);
      }
    }
    if (coin(rng) < 0.9) {
      std::uniform_int_distribution<std::size_t> where(0, s.words.size());
      s.words.insert(s.words.begin() + static_cast<std::ptrdiff_t>(where(rng)), Text(1, markers[era]));
    }
    return s;
  };

  SyntheticCorpus out;
  out.train.source_name = "synthetic-train";
  out.test.source_name = "synthetic-test";
  for (std::size_t i = 0; i < n_train; ++i) out.train.sentences.push_back(make_sentence(static_cast<int>(i % 2), false));
  for (std::size_t i = 0; i < n_test; ++i) out.test.sentences.push_back(make_sentence(static_cast<int>(i % 2), true));
  return out;
}

Vocab::Vocab() = default;

Vocab Vocab::from_chars(std::span<const Char> chars) {
  Vocab v;
  std::set<Char> uniq(chars.begin(), chars.end());
  for (Char c : uniq) {
    v.ids_[c] = static_cast<int>(v.chars_.size()) + 3;
    v.chars_.push_back(c);
  }
  return v;
}

Vocab Vocab::build(std::span<const RawCorpus> corpora) {
  std::vector<Char> all;
  for (const auto& c : corpora)
    for (const auto& s : c.sentences)
      for (const auto& w : s.words) all.insert(all.end(), w.begin(), w.end());
  return from_chars(all);
}

int Vocab::id(Char c) const {
  const auto it = ids_.find(c);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(std::u32string_view chars) const {
  std::vector<int> ids;
  ids.reserve(chars.size() + 1);
  ids.push_back(kSentinel);
  for (Char c : chars) ids.push_back(id(c));
  return ids;
}

std::string Vocab::serialize() const {
  std::ostringstream os;
  os << std::hex;
  for (Char c : chars_) os << static_cast<std::uint32_t>(c) << '\n';
  return os.str();
}

Vocab Vocab::deserialize(std::string_view text) {
  std::vector<Char> chars;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    chars.push_back(static_cast<Char>(std::stoul(line, nullptr, 16)));
  }
  Vocab v = from_chars(chars);
  if (v.chars_.size() != chars.size()) throw DataError("vocabulary contains duplicates");
  return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace crosswise
