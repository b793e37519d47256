#pragma once

#include <random>
#include <span>
#include <vector>

#include "crosswise/autodiff.h"
#include "crosswise/corpus.h"

namespace crosswise {

// Row index of the virtual start state in the transition matrix.
inline constexpr std::size_t kStartRow = kNumTags;

// Linear-chain CRF over {B, M, E, S}. transitions is (|L|+1) x |L|:
// entry (prev, next) scores the pair, row kStartRow scores the first label.
struct CrfParams {
  ParamId weight;       // d_a x 4
  ParamId bias;         // 1 x 4
  ParamId transitions;  // 5 x 4

  static CrfParams init(ParamSet& params, int d_a, std::mt19937_64& rng);
};

Var emissions(Var reps, const CrfParams& p);

// Score of one labelling: sum of emissions plus start and pair transitions.
double sequence_score(const Matrix& emissions, const Matrix& transitions, std::span<const Tag> tags);

// log of the sum of exp(sequence_score) over all |L|^T labellings, by the
// forward recursion.
double log_partition(const Matrix& emissions, const Matrix& transitions);

struct ViterbiResult {
  std::vector<Tag> tags;
  double score = 0.0;
};

// Best labelling; exact ties go to the lexicographically smallest sequence.
ViterbiResult viterbi(const Matrix& emissions, const Matrix& transitions);

// Per-position label marginals (T x 4).
Matrix marginals(const Matrix& emissions, const Matrix& transitions);

// log Z - score(gold) as a graph node. The backward rule uses the
// forward-backward marginals.
Var crf_nll(Var emissions, Var transitions, std::span<const Tag> gold);

}  // namespace crosswise
