#include "crosswise/encoder.h"

#include <vector>

#include "crosswise/error.h"

namespace crosswise {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (double& x : m.data) x = u(rng);
  return m;
}

namespace {

constexpr double kInitScale = 0.1;

GruParams init_gru(ParamSet& params, const std::string& prefix, int d_in, int hidden, std::mt19937_64& rng) {
  GruParams p;
  p.input_weight = params.add(prefix + ".w_x", uniform_matrix(d_in, 3 * hidden, kInitScale, rng));
  p.hidden_weight = params.add(prefix + ".w_h", uniform_matrix(hidden, 3 * hidden, kInitScale, rng));
  p.bias = params.add(prefix + ".b", uniform_matrix(1, 3 * hidden, kInitScale, rng));
  return p;
}

// Runs one direction over the rows of `projected` (input part of the gates,
// bias included) and returns the state after each row, in input order.
std::vector<Var> run_gru(Graph& g, Var projected, Var hidden_weight, std::size_t hidden, bool reverse) {
  using namespace ops;
  const std::size_t steps = projected.rows();
  std::vector<Var> states(steps);
  Var h = g.constant(Matrix(1, hidden));
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    Var x = slice_rows(projected, t, 1);
    Var hw = matmul(h, hidden_weight);
    Var gates = sigmoid(add(slice_cols(x, 0, 2 * hidden), slice_cols(hw, 0, 2 * hidden)));
    Var update = slice_cols(gates, 0, hidden);
    Var reset = slice_cols(gates, hidden, hidden);
    Var cand = ops::tanh(add(slice_cols(x, 2 * hidden, hidden), mul(reset, slice_cols(hw, 2 * hidden, hidden))));
    // h' = (1 - z) * n + z * h
    h = add(cand, mul(update, sub(h, cand)));
    states[t] = h;
  }
  return states;
}

}  // namespace

EncoderParams EncoderParams::init(ParamSet& params, std::size_t vocab_size, int d_e, int d_a, std::mt19937_64& rng) {
  if (d_a % 2 != 0) throw UsageError("d_a must be even");
  EncoderParams p;
  p.d_e = d_e;
  p.d_a = d_a;
  p.embedding = params.add("encoder.embedding", uniform_matrix(vocab_size, d_e, kInitScale, rng));
  p.forward = init_gru(params, "encoder.fwd", d_e, d_a / 2, rng);
  p.backward = init_gru(params, "encoder.bwd", d_e, d_a / 2, rng);
  return p;
}

Encoded encode(Graph& g, std::span<const int> ids, const EncoderParams& p) {
  using namespace ops;
  if (ids.size() < 2) throw DataError("cannot encode an empty sentence");
  const std::size_t hidden = static_cast<std::size_t>(p.d_a / 2);
  const std::size_t n_chars = ids.size() - 1;
  Var embedded = gather_rows(g.param(p.embedding), ids);

  auto direction = [&](const GruParams& gp, bool reverse) {
    Var projected = add(matmul(embedded, g.param(gp.input_weight)), g.param(gp.bias));
    return run_gru(g, projected, g.param(gp.hidden_weight), hidden, reverse);
  };
  const std::vector<Var> fwd = direction(p.forward, false);
  const std::vector<Var> bwd = direction(p.backward, true);

  Encoded out;
  out.sentence = concat_cols(fwd[0], bwd[0]);
  Var fwd_rows = concat_rows(std::span<const Var>(fwd).subspan(1, n_chars));
  Var bwd_rows = concat_rows(std::span<const Var>(bwd).subspan(1, n_chars));
  out.chars = concat_cols(fwd_rows, bwd_rows);
  return out;
}

}  // namespace crosswise
