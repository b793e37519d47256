#include "crosswise/metrics.h"

#include <cstdio>
#include <set>
#include <sstream>

#include "crosswise/error.h"

namespace crosswise {

SegScore SegScore::from_counts(std::size_t gold, std::size_t predicted, std::size_t correct) {
  SegScore s;
  s.gold_words = gold;
  s.predicted_words = predicted;
  s.correct_words = correct;
  s.precision = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

SegScore& SegScore::operator+=(const SegScore& o) {
  *this = from_counts(gold_words + o.gold_words, predicted_words + o.predicted_words, correct_words + o.correct_words);
  return *this;
}

namespace {

using Span = std::pair<std::size_t, std::size_t>;

std::vector<Span> spans_of(const WordSeq& words) {
  std::vector<Span> out;
  std::size_t pos = 0;
  for (const Text& w : words) {
    out.emplace_back(pos, pos + w.size());
    pos += w.size();
  }
  return out;
}

Text concat(const WordSeq& words) {
  Text t;
  for (const Text& w : words) t += w;
  return t;
}

void check_pair(std::span<const WordSeq> gold, std::span<const WordSeq> predicted) {
  if (gold.size() != predicted.size())
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences, prediction " +
                    std::to_string(predicted.size()));
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (concat(gold[i]) != concat(predicted[i]))
      throw DataError("sentence " + std::to_string(i + 1) + ": predicted characters differ from gold");
}

}  // namespace

SegScore score_segmentation(std::span<const WordSeq> gold, std::span<const WordSeq> predicted) {
  check_pair(gold, predicted);
  std::size_t n_gold = 0, n_pred = 0, n_correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = spans_of(gold[i]);
    const std::set<Span> gset(g.begin(), g.end());
    const auto p = spans_of(predicted[i]);
    n_gold += g.size();
    n_pred += p.size();
    for (const Span& s : p) n_correct += gset.count(s);
  }
  return SegScore::from_counts(n_gold, n_pred, n_correct);
}

std::optional<double> OovScore::recall() const {
  if (oov_tokens == 0) return std::nullopt;
  return static_cast<double>(recovered) / static_cast<double>(oov_tokens);
}

OovScore oov_recall(std::span<const WordSeq> gold, std::span<const WordSeq> predicted, const WordSet& training_words) {
  check_pair(gold, predicted);
  OovScore out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto p = spans_of(predicted[i]);
    const std::set<Span> pset(p.begin(), p.end());
    const auto g = spans_of(gold[i]);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (training_words.count(gold[i][k])) continue;
      ++out.oov_tokens;
      out.recovered += pset.count(g[k]);
    }
  }
  return out;
}

double era_accuracy(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) throw DataError("era label counts differ");
  if (gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

WordSet word_types(const RawCorpus& corpus, std::optional<int> era) {
  WordSet out;
  for (const auto& s : corpus.sentences)
    if (!era || s.era == *era) out.insert(s.words.begin(), s.words.end());
  return out;
}

std::string format_ratio(std::optional<double> x) {
  if (!x) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *x);
  return buf;
}

std::string format_report(std::span<const EraReportRow> rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %8s %8s %8s %8s %8s %8s\n", "era", "sents", "P", "R", "F1", "R_oov",
                "era_acc");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-6s %8zu %8.4f %8.4f %8.4f %8s %8s\n", r.label.c_str(), r.sentences,
                  r.seg.precision, r.seg.recall, r.seg.f1, format_ratio(r.oov.recall()).c_str(),
                  format_ratio(r.era_acc).c_str());
    os << line;
  }
  for (const auto& r : rows)
    os << "era=" << r.label << " f1=" << format_ratio(r.seg.f1) << " roov=" << format_ratio(r.oov.recall()) << '\n';
  return os.str();
}

}  // namespace crosswise
