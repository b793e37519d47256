#pragma once
// Oracles and fixtures shared by the unit tests and the acceptance binary.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "crosswise/crf.h"
#include "crosswise/model.h"

namespace crosswise::testing {

inline constexpr std::size_t ix(Tag t) { return static_cast<std::size_t>(t); }

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (double& x : m.data) x = u(rng);
  return m;
}

// Every labelling of length T in lexicographic order (B < M < E < S).
inline std::vector<std::vector<Tag>> all_labellings(std::size_t T) {
  std::vector<std::vector<Tag>> out;
  std::size_t total = 1;
  for (std::size_t t = 0; t < T; ++t) total *= kNumTags;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<Tag> tags(T);
    std::size_t c = code;
    for (std::size_t t = T; t-- > 0;) {
      tags[t] = static_cast<Tag>(c % kNumTags);
      c /= kNumTags;
    }
    out.push_back(std::move(tags));
  }
  return out;
}

struct BruteForceCrf {
  double log_z = 0.0;
  std::vector<Tag> best;
  double best_score = 0.0;
  Matrix marginals;
};

// Enumerates all |L|^T labellings. Ties keep the first (smallest) sequence.
inline BruteForceCrf brute_force_crf(const Matrix& em, const Matrix& tr) {
  const auto seqs = all_labellings(em.rows);
  std::vector<double> scores;
  double max_score = -std::numeric_limits<double>::infinity();
  BruteForceCrf out;
  for (const auto& tags : seqs) {
    const double s = sequence_score(em, tr, tags);
    scores.push_back(s);
    if (s > max_score) {
      max_score = s;
      out.best = tags;
    }
  }
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - max_score);
  out.log_z = max_score + std::log(acc);
  out.best_score = max_score;
  out.marginals = Matrix(em.rows, kNumTags);
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    const double p = std::exp(scores[k] - out.log_z);
    for (std::size_t t = 0; t < em.rows; ++t) out.marginals.at(t, static_cast<std::size_t>(seqs[k][t])) += p;
  }
  return out;
}

// Toy two-era model over the alphabet "abcd" with small dictionaries, for
// gradient checks and switch tests.
inline Model toy_model(SwitchMode sw, FusionMode fu, int d_a = 8, std::uint64_t seed = 7, bool memory = true) {
  ModelConfig cfg;
  cfg.d_e = 6;
  cfg.d_a = d_a;
  cfg.eras = 2;
  cfg.switch_mode = sw;
  cfg.fusion = fu;
  cfg.memory = memory;
  const Char alphabet[] = {U'a', U'b', U'c', U'd'};
  std::vector<EraLexicon> lex;
  lex.emplace_back(0, std::vector<Text>{U"ab", U"a", U"b", U"abc"});
  lex.emplace_back(1, std::vector<Text>{U"a", U"b", U"bc", U"cd"});
  Model model(cfg, Vocab::from_chars(alphabet), std::move(lex), seed);
  // Non-zero transitions so their gradient path is exercised.
  std::mt19937_64 rng(seed + 1);
  model.params()[model.crf().transitions].value = random_matrix(kNumTags + 1, kNumTags, rng, 0.5);
  return model;
}

inline PreparedSentence toy_sentence(const Model& model, Text chars, std::vector<Tag> tags, int era) {
  return prepare(model, LabeledSentence{std::move(chars), std::move(tags), era});
}

// Full-model joint loss on one labelled sentence as a grad_check builder.
inline GradCheckReport full_model_grad_check(Model& model, const PreparedSentence& s, double alpha) {
  return grad_check(
      [&](Graph& g) { return build_sentence_graph(g, model, s, alpha, true).loss; }, model.params(), 1e-5, 1e-4);
}

// A scalar that depends on every entry of `v` with distinct weights, so
// per-entry gradient errors cannot cancel.
inline Var weighted_sum(Graph& g, Var v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ops::sum(ops::mul(v, g.constant(random_matrix(v.rows(), v.cols(), rng))));
}

inline GradCheckReport check_unary(const std::function<Var(Var)>& op, std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet ps;
  const ParamId a = ps.add("a", random_matrix(r, c, rng));
  return grad_check([&](Graph& g) { return weighted_sum(g, op(g.param(a)), seed + 1); }, ps, 1e-5, 1e-4);
}

inline GradCheckReport check_binary(const std::function<Var(Var, Var)>& op, std::size_t ra, std::size_t ca, std::size_t rb,
                             std::size_t cb, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet ps;
  const ParamId a = ps.add("a", random_matrix(ra, ca, rng));
  const ParamId b = ps.add("b", random_matrix(rb, cb, rng));
  return grad_check([&](Graph& g) { return weighted_sum(g, op(g.param(a), g.param(b)), seed + 1); }, ps, 1e-5, 1e-4);
}

// Random-input check of every autodiff op, one report per op.
inline std::vector<std::pair<std::string, GradCheckReport>> op_grad_checks() {
  using namespace ops;
  std::vector<std::pair<std::string, GradCheckReport>> out;
  out.emplace_back("matmul", check_binary(matmul, 3, 4, 4, 2, 11));
  out.emplace_back("matmul_nt", check_binary(matmul_nt, 3, 4, 5, 4, 12));
  out.emplace_back("add", check_binary(add, 3, 4, 3, 4, 13));
  out.emplace_back("add row broadcast", check_binary(add, 3, 4, 1, 4, 14));
  out.emplace_back("sub", check_binary(sub, 2, 5, 2, 5, 15));
  out.emplace_back("mul", check_binary(mul, 3, 3, 3, 3, 16));
  out.emplace_back("mul row broadcast", check_binary(mul, 3, 3, 1, 3, 17));
  out.emplace_back("mul_scalar", check_binary(mul_scalar, 3, 2, 1, 1, 18));
  out.emplace_back("concat_cols", check_binary([](Var a, Var b) { return concat_cols(a, b); }, 3, 2, 3, 4, 19));
  out.emplace_back("concat_rows", check_binary(
                                          [](Var a, Var b) {
                                            const Var parts[] = {a, b, a};
                                            return concat_rows(parts);
                                          },
                                          2, 3, 1, 3, 20));
  out.emplace_back("scale", check_unary([](Var a) { return scale(a, -1.7); }, 2, 3, 21));
  out.emplace_back("add_scalar", check_unary([](Var a) { return add_scalar(a, 0.3); }, 2, 3, 22));
  out.emplace_back("gather_rows", check_unary(
                                          [](Var a) {
                                            const int rows[] = {2, 0, 2, 1};
                                            return gather_rows(a, rows);
                                          },
                                          3, 4, 23));
  out.emplace_back("slice_rows", check_unary([](Var a) { return slice_rows(a, 1, 2); }, 4, 3, 24));
  out.emplace_back("slice_cols", check_unary([](Var a) { return slice_cols(a, 1, 2); }, 3, 4, 25));
  out.emplace_back("tanh", check_unary([](Var a) { return ops::tanh(a); }, 3, 4, 26));
  out.emplace_back("sigmoid", check_unary([](Var a) { return sigmoid(a); }, 3, 4, 27));
  out.emplace_back("softmax_row", check_unary([](Var a) { return softmax_row(a); }, 3, 4, 28));
  out.emplace_back("log_softmax_row", check_unary([](Var a) { return log_softmax_row(a); }, 3, 4, 29));
  out.emplace_back("logsumexp_row", check_unary([](Var a) { return logsumexp_row(a); }, 3, 4, 30));
  out.emplace_back("sum", check_unary([](Var a) { return ops::sum(a); }, 3, 4, 31));
  out.emplace_back("pick", check_unary([](Var a) { return pick(a, 1, 2); }, 3, 4, 32));
  out.emplace_back("crf_nll", check_binary(
                                  [](Var em, Var tr) {
                                    const Tag gold[] = {Tag::B, Tag::E, Tag::S};
                                    return crf_nll(em, tr, gold);
                                  },
                                  3, 4, 5, 4, 33));
  return out;
}

}  // namespace crosswise::testing
