#pragma once

#include <optional>
#include <random>
#include <span>

#include "crosswise/autodiff.h"
#include "crosswise/config.h"

namespace crosswise {

struct DiscriminatorParams {
  ParamId weight;  // d_a x E
  ParamId bias;    // 1 x E

  static DiscriminatorParams init(ParamSet& params, int d_a, int eras, std::mt19937_64& rng);
};

struct FusionParams {
  ParamId weight;  // d_a x d_a (sum) or 2 d_a x d_a (concat)
  ParamId bias;    // 1 x d_a
  FusionMode mode = FusionMode::Concat;

  static FusionParams init(ParamSet& params, int d_a, FusionMode mode, std::mt19937_64& rng);
};

Var era_logits(Var sentence, const DiscriminatorParams& p);
// 1 x E probabilities.
Var classify_era(Var sentence, const DiscriminatorParams& p);
// -log P(gold | sentence), 1 x 1.
Var discriminator_loss(Var sentence, const DiscriminatorParams& p, int gold_era);

// Lowest index wins ties.
int argmax_era(std::span<const double> probs);

// Era whose memory the hard switch uses: the gold era while training,
// otherwise the discriminator's argmax. Throws when training without gold.
int hard_route(std::span<const double> era_probs, std::optional<int> gold_era, bool training);

// Combines per-era memory outputs (all the same shape). Hard mode selects
// hard_route(...); soft mode weights cell d by era_probs[d].
Var switch_cells(std::span<const Var> cells, Var era_probs, SwitchMode mode, std::optional<int> gold_era,
                 bool training);

// W_o (memory (+) chars) + b with (+) = sum or column concatenation.
Var fuse(Var memory, Var chars, const FusionParams& p);

}  // namespace crosswise
