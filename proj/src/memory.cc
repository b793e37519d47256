#include "crosswise/memory.h"

#include <string>

#include "crosswise/encoder.h"
#include "crosswise/error.h"

namespace crosswise {

MemoryParams MemoryParams::init(ParamSet& params, std::span<const std::size_t> lexicon_sizes, int d_a,
                                std::mt19937_64& rng) {
  MemoryParams p;
  for (std::size_t d = 0; d < lexicon_sizes.size(); ++d)
    p.keys.push_back(params.add("memory.keys." + std::to_string(d),
                                uniform_matrix(std::max<std::size_t>(lexicon_sizes[d], 1), d_a, 0.1, rng)));
  p.values = params.add("memory.values", uniform_matrix(kNumValueClasses, d_a, 0.1, rng));
  return p;
}

Var attend(Var h, Var key_table, std::span<const Candidate> candidates) {
  if (candidates.empty()) throw ShapeError("attend: no candidates");
  std::vector<int> rows;
  rows.reserve(candidates.size());
  for (const auto& c : candidates) rows.push_back(c.word_id);
  Var keys = ops::gather_rows(key_table, rows);
  return ops::softmax_row(ops::matmul_nt(h, keys));
}

Var aggregate(Var weights, Var value_table, std::span<const Candidate> candidates) {
  if (weights.cols() != candidates.size())
    throw ShapeError("aggregate: " + std::to_string(weights.cols()) + " weights for " +
                     std::to_string(candidates.size()) + " candidates");
  if (candidates.empty()) return weights.graph->constant(Matrix(1, value_table.cols()));
  std::vector<int> rows;
  rows.reserve(candidates.size());
  for (const auto& c : candidates) rows.push_back(static_cast<int>(c.value));
  return ops::matmul(weights, ops::gather_rows(value_table, rows));
}

Var memory_cell(Var chars, Var key_table, Var value_table, const CandidateSet& candidates) {
  Graph& g = *chars.graph;
  if (candidates.size() != chars.rows())
    throw ShapeError("memory_cell: " + std::to_string(candidates.size()) + " candidate lists for " +
                     std::to_string(chars.rows()) + " characters");
  std::vector<Var> rows;
  rows.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].empty()) {
      rows.push_back(g.constant(Matrix(1, value_table.cols())));
      continue;
    }
    Var p = attend(ops::slice_rows(chars, i, 1), key_table, candidates[i]);
    rows.push_back(aggregate(p, value_table, candidates[i]));
  }
  return ops::concat_rows(rows);
}

}  // namespace crosswise
