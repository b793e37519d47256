#include "crosswise/switcher.h"

#include <string>

#include "crosswise/encoder.h"
#include "crosswise/error.h"

namespace crosswise {

DiscriminatorParams DiscriminatorParams::init(ParamSet& params, int d_a, int eras, std::mt19937_64& rng) {
  DiscriminatorParams p;
  p.weight = params.add("disc.w", uniform_matrix(d_a, eras, 0.1, rng));
  p.bias = params.add("disc.b", Matrix(1, eras));
  return p;
}

FusionParams FusionParams::init(ParamSet& params, int d_a, FusionMode mode, std::mt19937_64& rng) {
  FusionParams p;
  p.mode = mode;
  const int d_in = mode == FusionMode::Concat ? 2 * d_a : d_a;
  p.weight = params.add("fusion.w", uniform_matrix(d_in, d_a, 0.1, rng));
  p.bias = params.add("fusion.b", Matrix(1, d_a));
  return p;
}

Var era_logits(Var sentence, const DiscriminatorParams& p) {
  Graph& g = *sentence.graph;
  return ops::add(ops::matmul(sentence, g.param(p.weight)), g.param(p.bias));
}

Var classify_era(Var sentence, const DiscriminatorParams& p) { return ops::softmax_row(era_logits(sentence, p)); }

Var discriminator_loss(Var sentence, const DiscriminatorParams& p, int gold_era) {
  Var logp = ops::log_softmax_row(era_logits(sentence, p));
  if (gold_era < 0 || static_cast<std::size_t>(gold_era) >= logp.cols())
    throw DataError("era id " + std::to_string(gold_era) + " outside [0, " + std::to_string(logp.cols()) + ")");
  return ops::scale(ops::pick(logp, 0, static_cast<std::size_t>(gold_era)), -1.0);
}

int argmax_era(std::span<const double> probs) {
  int best = 0;
  for (std::size_t d = 1; d < probs.size(); ++d)
    if (probs[d] > probs[best]) best = static_cast<int>(d);
  return best;
}

int hard_route(std::span<const double> era_probs, std::optional<int> gold_era, bool training) {
  if (training) {
    if (!gold_era) throw UsageError("hard switching during training needs the gold era");
    if (*gold_era < 0 || static_cast<std::size_t>(*gold_era) >= era_probs.size())
      throw DataError("era id " + std::to_string(*gold_era) + " outside [0, " + std::to_string(era_probs.size()) +
                      ")");
    return *gold_era;
  }
  return argmax_era(era_probs);
}

Var switch_cells(std::span<const Var> cells, Var era_probs, SwitchMode mode, std::optional<int> gold_era,
                 bool training) {
  const Matrix& probs = era_probs.value();
  if (probs.rows != 1 || probs.cols != cells.size())
    throw ShapeError("switch: " + std::to_string(cells.size()) + " cells but era probabilities " + shape_str(probs));
  if (mode == SwitchMode::Hard) return cells[hard_route(probs.data, gold_era, training)];
  Var out = ops::mul_scalar(cells[0], ops::pick(era_probs, 0, 0));
  for (std::size_t d = 1; d < cells.size(); ++d)
    out = ops::add(out, ops::mul_scalar(cells[d], ops::pick(era_probs, 0, d)));
  return out;
}

Var fuse(Var memory, Var chars, const FusionParams& p) {
  Graph& g = *chars.graph;
  Var w = g.param(p.weight);
  Var combined = p.mode == FusionMode::Concat ? ops::concat_cols(memory, chars) : ops::add(memory, chars);
  if (combined.cols() != w.rows())
    throw ShapeError("fuse: " + to_string(p.mode) + " input " + shape_str(combined.value()) +
                     " does not match W_o " + shape_str(w.value()));
  return ops::add(ops::matmul(combined, w), g.param(p.bias));
}

}  // namespace crosswise
