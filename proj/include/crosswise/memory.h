#pragma once

#include <random>
#include <span>
#include <vector>

#include "crosswise/autodiff.h"
#include "crosswise/lexicon.h"

namespace crosswise {

// Key tables are per era and indexed by lexicon word id; the four value
// vectors (rows B, M, E, S) are shared by all eras.
struct MemoryParams {
  std::vector<ParamId> keys;  // |D_d| x d_a
  ParamId values;             // 4 x d_a

  static MemoryParams init(ParamSet& params, std::span<const std::size_t> lexicon_sizes, int d_a,
                           std::mt19937_64& rng);
};

// Attention over the candidate keys of one character: softmax of h . key.
// `candidates` must be non-empty. Returns 1 x m.
Var attend(Var h, Var key_table, std::span<const Candidate> candidates);

// Weighted sum of the candidates' value vectors. Returns 1 x d_a.
Var aggregate(Var weights, Var value_table, std::span<const Candidate> candidates);

// Memory output of one era for every character of a sentence (T x d_a);
// rows of characters without candidates are zero.
Var memory_cell(Var chars, Var key_table, Var value_table, const CandidateSet& candidates);

}  // namespace crosswise
