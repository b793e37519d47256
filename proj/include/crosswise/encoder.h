#pragma once

#include <random>
#include <span>

#include "crosswise/autodiff.h"

namespace crosswise {

// Gate order in the packed matrices is [update, reset, candidate].
struct GruParams {
  ParamId input_weight;   // d_in x 3h
  ParamId hidden_weight;  // h x 3h
  ParamId bias;           // 1 x 3h
};

struct EncoderParams {
  ParamId embedding;  // |V| x d_e
  GruParams forward;
  GruParams backward;
  int d_e = 0;
  int d_a = 0;

  static EncoderParams init(ParamSet& params, std::size_t vocab_size, int d_e, int d_a, std::mt19937_64& rng);
};

struct Encoded {
  Var sentence;  // 1 x d_a, state at the sentinel
  Var chars;     // T x d_a, row i is [forward_i, backward_i]
};

// `ids` starts with the sentinel id followed by T >= 1 char ids.
Encoded encode(Graph& g, std::span<const int> ids, const EncoderParams& p);

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng);

}  // namespace crosswise
