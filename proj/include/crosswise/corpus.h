#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crosswise {

using Char = char32_t;
using Text = std::u32string;

// Reserved code points (private use area) standing in for runs of Latin
// letters, runs of digits, and single punctuation marks.
inline constexpr Char kLatinToken = U'\uE000';
inline constexpr Char kNumberToken = U'\uE001';
inline constexpr Char kPunctToken = U'\uE002';

enum class Tag : std::uint8_t { B = 0, M = 1, E = 2, S = 3 };
inline constexpr int kNumTags = 4;

char tag_char(Tag t);

// UTF-8 <-> code points. decode_utf8 throws DataError with the byte offset.
Text decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view text);

std::vector<Tag> words_to_bmes(std::span<const Text> words);
// Words for a (possibly malformed) tag sequence. A boundary is closed before
// every B or S and at the end of the sentence, so the output always
// concatenates back to `chars`.
std::vector<Text> bmes_to_words(std::u32string_view chars, std::span<const Tag> tags);
bool tags_well_formed(std::span<const Tag> tags);

struct PreprocessedText {
  Text chars;
  // Half-open span [first, second) of the source text each char came from.
  std::vector<std::pair<std::size_t, std::size_t>> source_spans;
};

// Collapses Latin-letter runs to kLatinToken and digit runs to kNumberToken,
// maps each punctuation mark to kPunctToken, and drops whitespace. Everything
// else passes through. Idempotent.
PreprocessedText preprocess_aligned(std::u32string_view text);
Text preprocess(std::u32string_view text);
std::string preprocess(std::string_view utf8);

bool is_punct_char(Char c);
bool is_space_char(Char c);

struct RawSentence {
  std::vector<Text> words;
  int era = 0;
};

struct RawCorpus {
  std::vector<RawSentence> sentences;
  std::string source_name;

  std::size_t word_count() const;
};

struct LabeledSentence {
  Text chars;
  std::vector<Tag> tags;  // empty when unlabeled
  std::optional<int> era;
};

LabeledSentence to_labeled(const RawSentence& sentence);
Text joined_chars(const RawSentence& sentence);

inline constexpr std::size_t kDefaultMaxLen = 126;

// Splits a sentence longer than `max_len` chars at the last punctuation word
// that fits, else at the last word boundary that fits.
std::vector<RawSentence> split_long(const RawSentence& sentence, std::size_t max_len);
// Same for unsegmented text; falls back to a hard cut at `max_len`.
std::vector<std::pair<std::size_t, std::size_t>> split_text(std::u32string_view chars, std::size_t max_len);

// One sentence per line, words separated by U+0020. Preprocessing is applied
// per word and blank lines are skipped.
RawCorpus load_corpus(const std::filesystem::path& path, int era, std::size_t max_len = kDefaultMaxLen);
RawCorpus parse_corpus(std::string_view contents, int era, std::string source_name,
                       std::size_t max_len = kDefaultMaxLen);
void write_corpus(const RawCorpus& corpus, const std::filesystem::path& path);

// Two-era toy corpora. Certain character bigrams are one word in era 0 and
// two single-character words in era 1; 90% of sentences carry an era marker
// character; each era also has its own word types. Test sentences include
// word types never seen in training.
struct SyntheticCorpus {
  RawCorpus train;
  RawCorpus test;
};
SyntheticCorpus make_synthetic_corpus(std::uint64_t seed, std::size_t n_train, std::size_t n_test);

inline constexpr Char kEraMarker0 = U'\u66F0';
inline constexpr Char kEraMarker1 = U'\u7684';

// Character vocabulary. Ids 0..2 are reserved.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSentinel = 2;

  Vocab();
  static Vocab build(std::span<const RawCorpus> corpora);
  static Vocab from_chars(std::span<const Char> chars);

  int id(Char c) const;
  // Sentinel followed by the char ids.
  std::vector<int> encode(std::u32string_view chars) const;
  std::size_t size() const { return chars_.size() + 3; }
  // Non-reserved chars in id order.
  const std::vector<Char>& chars() const { return chars_; }
  std::string serialize() const;
  static Vocab deserialize(std::string_view text);

 private:
  std::vector<Char> chars_;
  std::unordered_map<Char, int> ids_;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace crosswise
