#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "crosswise/corpus.h"

namespace crosswise {

using WordSeq = std::vector<Text>;

struct SegScore {
  std::size_t gold_words = 0;
  std::size_t predicted_words = 0;
  std::size_t correct_words = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Recomputes P, R and F1 from the counts.
  static SegScore from_counts(std::size_t gold, std::size_t predicted, std::size_t correct);
  SegScore& operator+=(const SegScore& other);
};

// Span-matched word scores, micro-averaged over sentences. Each predicted
// sentence must spell the same characters as its gold sentence.
SegScore score_segmentation(std::span<const WordSeq> gold, std::span<const WordSeq> predicted);

struct OovScore {
  std::size_t oov_tokens = 0;
  std::size_t recovered = 0;
  // nullopt when there are no OOV gold tokens
  std::optional<double> recall() const;
};

struct TextHash {
  std::size_t operator()(const Text& t) const noexcept { return std::hash<std::u32string>{}(t); }
};
using WordSet = std::unordered_set<Text, TextHash>;

OovScore oov_recall(std::span<const WordSeq> gold, std::span<const WordSeq> predicted, const WordSet& training_words);

double era_accuracy(std::span<const int> gold, std::span<const int> predicted);

WordSet word_types(const RawCorpus& corpus, std::optional<int> era = std::nullopt);

struct EraReportRow {
  std::string label;  // era id or "all"
  std::size_t sentences = 0;
  SegScore seg;
  OovScore oov;
  std::optional<double> era_acc;
};

// Aligned table followed by one `era=<id> f1=<x> roov=<x|NA>` line per row.
std::string format_report(std::span<const EraReportRow> rows);
std::string format_ratio(std::optional<double> x);

}  // namespace crosswise
