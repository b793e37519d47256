#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "crosswise/corpus.h"
#include "crosswise/error.h"

using namespace crosswise;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("xws_corpus_" + name);
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

std::vector<Text> random_words(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_words(1, 8), len(1, 5), ch(0, 5);
  std::vector<Text> words(static_cast<std::size_t>(n_words(rng)));
  for (Text& w : words)
    for (int k = len(rng); k > 0; --k) w.push_back(U'一' + static_cast<Char>(ch(rng)));
  return words;
}

}  // namespace

TEST_CASE("words_to_bmes on the gold row and trivial words") {
  const std::vector<Text> gold{U"等待", U"谁", U"来"};
  CHECK(words_to_bmes(gold) == std::vector<Tag>{Tag::B, Tag::E, Tag::S, Tag::S});
  const std::vector<Text> one{U"a"};
  CHECK(words_to_bmes(one) == std::vector<Tag>{Tag::S});
  const std::vector<Text> three{U"abc"};
  CHECK(words_to_bmes(three) == std::vector<Tag>{Tag::B, Tag::M, Tag::E});
}

TEST_CASE("words_to_bmes rejects an empty sentence") {
  try {
    words_to_bmes(std::vector<Text>{});
    FAIL("no error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("empty sentence") != std::string::npos);
  }
}

TEST_CASE("bmes_to_words inverts the scheme and repairs invalid tags") {
  const Tag bes[] = {Tag::B, Tag::E, Tag::S};
  CHECK(bmes_to_words(U"等待谁", bes) == std::vector<Text>{U"等待", U"谁"});
  const Tag bb[] = {Tag::B, Tag::B};
  CHECK(bmes_to_words(U"ab", bb) == std::vector<Text>{U"a", U"b"});
  const Tag bmm[] = {Tag::B, Tag::M, Tag::M};
  CHECK(bmes_to_words(U"abc", bmm) == std::vector<Text>{U"abc"});
  CHECK_THROWS_AS(bmes_to_words(U"abc", bb), DataError);
}

TEST_CASE("BMES round trip and length on random word lists") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const auto words = random_words(rng);
    const auto tags = words_to_bmes(words);
    Text chars;
    for (const Text& w : words) chars += w;
    CHECK(tags.size() == chars.size());
    CHECK(tags_well_formed(tags));
    CHECK(bmes_to_words(chars, tags) == words);
  }
}

TEST_CASE("repair always reproduces the input characters") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> tag(0, 3), len(1, 12);
  for (int trial = 0; trial < 500; ++trial) {
    Text chars;
    std::vector<Tag> tags;
    for (int k = len(rng); k > 0; --k) {
      chars.push_back(U'a' + static_cast<Char>(k));
      tags.push_back(static_cast<Tag>(tag(rng)));
    }
    Text joined;
    for (const Text& w : bmes_to_words(chars, tags)) {
      CHECK_FALSE(w.empty());
      joined += w;
    }
    CHECK(joined == chars);
  }
}

TEST_CASE("preprocess replaces runs and punctuation") {
  CHECK(preprocess(std::string_view("等待2021年")) == encode_utf8(U"等待\uE001年"));
  CHECK(preprocess(std::string_view("abc等")) == encode_utf8(U"\uE000等"));
  CHECK(preprocess(std::u32string_view(U"你好，世界。")) == Text(U"你好\uE002世界\uE002"));
  CHECK(preprocess(std::u32string_view(U"ab 12")) == Text(U"\uE000\uE001"));
}

TEST_CASE("preprocess is idempotent and never adds tokens") {
  const Char pool[] = {U'a', U'Z', U'0', U'9', U'，', U'.', U' ', U'等', U'待', U'\uE000', U'\uE002', U'!'};
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(pool) - 1), len(0, 20);
  for (int trial = 0; trial < 500; ++trial) {
    Text s;
    for (std::size_t k = len(rng); k > 0; --k) s.push_back(pool[pick(rng)]);
    const Text once = preprocess(s);
    CHECK(preprocess(once) == once);
    CHECK(once.size() <= s.size());
  }
}

TEST_CASE("aligned preprocessing maps tokens back to source spans") {
  const Text src = U"ab 12等";
  const PreprocessedText pre = preprocess_aligned(src);
  REQUIRE(pre.chars == Text(U"\uE000\uE001等"));
  CHECK(pre.source_spans[0] == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(pre.source_spans[1] == std::pair<std::size_t, std::size_t>{3, 5});
  CHECK(pre.source_spans[2] == std::pair<std::size_t, std::size_t>{5, 6});
}

TEST_CASE("UTF-8 decoding round-trips and rejects malformed input") {
  const Text t = U"等待a\U0001F600";
  CHECK(decode_utf8(encode_utf8(t)) == t);
  CHECK_THROWS_AS(decode_utf8("\xff"), DataError);
  CHECK_THROWS_AS(decode_utf8("\xc0\xaf"), DataError);      // overlong
  CHECK_THROWS_AS(decode_utf8("\xed\xa0\x80"), DataError);  // surrogate
  CHECK_THROWS_AS(decode_utf8("\xe7\xad"), DataError);      // truncated
}

TEST_CASE("load_corpus: one sentence, empty file, blank interior line") {
  const RawCorpus one = load_corpus(temp_file("one.txt", "等待 谁\n"), 3);
  REQUIRE(one.sentences.size() == 1);
  CHECK(one.sentences[0].era == 3);
  CHECK(one.sentences[0].words == std::vector<Text>{U"等待", U"谁"});
  CHECK(load_corpus(temp_file("empty.txt", ""), 0).sentences.empty());
  CHECK(load_corpus(temp_file("blank.txt", "a b\n\n  \nc d\n"), 1).sentences.size() == 2);
}

TEST_CASE("load_corpus errors carry the line number") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/xws/corpus.txt", 0), DataError);
  try {
    load_corpus(temp_file("bad.txt", "a b\nc \xff d\n"), 0);
    FAIL("no error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("long sentences split at the last punctuation that fits") {
  RawSentence s;
  s.era = 1;
  s.words = {U"甲乙", U"丙", Text(1, kPunctToken), U"丁戊", U"己"};
  const auto parts = split_long(s, 4);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].words == std::vector<Text>{U"甲乙", U"丙", Text(1, kPunctToken)});
  CHECK(parts[1].words == std::vector<Text>{U"丁戊", U"己"});
  CHECK(parts[1].era == 1);
  // without punctuation: last word boundary
  s.words = {U"甲乙", U"丙丁", U"戊"};
  const auto plain = split_long(s, 3);
  CHECK(plain.size() == 2);
  for (const auto& p : plain) CHECK(joined_chars(p).size() <= 3);
  // unsegmented text falls back to a hard cut
  const auto spans = split_text(U"abcdefg", 3);
  CHECK(spans.back().second == 7);
  for (const auto& [b, e] : spans) CHECK(e - b <= 3);
}

TEST_CASE("synthetic corpus is deterministic and era-ambiguous") {
  const auto a = make_synthetic_corpus(9, 400, 100);
  const auto b = make_synthetic_corpus(9, 400, 100);
  const auto path_a = std::filesystem::temp_directory_path() / "xws_synth_a.txt";
  const auto path_b = std::filesystem::temp_directory_path() / "xws_synth_b.txt";
  write_corpus(a.train, path_a);
  write_corpus(b.train, path_b);
  std::ifstream fa(path_a), fb(path_b);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(a.train.sentences.size() == 400);
  CHECK(a.test.sentences.size() == 100);

  std::set<Text> words0, words1, pairs1;
  std::size_t markers = 0;
  for (const auto& s : a.train.sentences) {
    auto& set = s.era == 0 ? words0 : words1;
    for (std::size_t k = 0; k < s.words.size(); ++k) {
      set.insert(s.words[k]);
      if (s.words[k] == Text(1, s.era == 0 ? kEraMarker0 : kEraMarker1)) ++markers;
      if (s.era == 1 && k + 1 < s.words.size() && s.words[k].size() == 1 && s.words[k + 1].size() == 1)
        pairs1.insert(s.words[k] + s.words[k + 1]);
    }
  }
  // some bigram is one word in era 0 and two single-char words in era 1
  std::size_t ambiguous = 0;
  for (const Text& w : words0)
    if (w.size() == 2 && pairs1.count(w) && !words1.count(w)) ++ambiguous;
  CHECK(ambiguous > 0);
  CHECK(markers > 300);
  CHECK(markers < 400);

  std::size_t oov = 0;
  for (const auto& s : a.test.sentences)
    for (const Text& w : s.words) oov += !(s.era == 0 ? words0 : words1).count(w);
  CHECK(oov > 0);
  CHECK_THROWS_AS(make_synthetic_corpus(1, 0, 10), UsageError);
}

TEST_CASE("vocab reserves ids and never emits the sentinel for text") {
  const Char chars[] = {U'b', U'a', U'等'};
  const Vocab v = Vocab::from_chars(chars);
  CHECK(v.size() == 6);
  CHECK(v.id(U'a') == 3);
  CHECK(v.id(U'b') == 4);
  CHECK(v.id(U'z') == Vocab::kUnk);
  const auto ids = v.encode(U"ab的z");
  CHECK(ids == std::vector<int>{Vocab::kSentinel, 3, 4, Vocab::kUnk, Vocab::kUnk});
  for (std::size_t k = 1; k < ids.size(); ++k) CHECK(ids[k] != Vocab::kSentinel);
  const Vocab back = Vocab::deserialize(v.serialize());
  CHECK(back.chars() == v.chars());
}
