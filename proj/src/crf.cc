#include "crosswise/crf.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crosswise/encoder.h"
#include "crosswise/error.h"

namespace crosswise {

namespace {

constexpr std::size_t L = kNumTags;

void check_shapes(const Matrix& em, const Matrix& tr) {
  if (em.rows == 0) throw DataError("CRF over an empty sentence");
  if (em.cols != L) throw ShapeError("emissions must have 4 columns, got " + shape_str(em));
  if (tr.rows != L + 1 || tr.cols != L) throw ShapeError("transitions must be 5x4, got " + shape_str(tr));
}

double lse(const double* x, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(x[i] - mx);
  return mx + std::log(acc);
}

// alpha(t, y): log-sum over prefixes ending in y at t, emission included.
Matrix forward_table(const Matrix& em, const Matrix& tr) {
  const std::size_t T = em.rows;
  Matrix alpha(T, L);
  for (std::size_t y = 0; y < L; ++y) alpha.at(0, y) = tr.at(kStartRow, y) + em.at(0, y);
  double buf[L];
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) buf[p] = alpha.at(t - 1, p) + tr.at(p, y);
      alpha.at(t, y) = lse(buf, L) + em.at(t, y);
    }
  return alpha;
}

// beta(t, y): log-sum over suffixes after t given y at t.
Matrix backward_table(const Matrix& em, const Matrix& tr) {
  const std::size_t T = em.rows;
  Matrix beta(T, L);
  double buf[L];
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t n = 0; n < L; ++n) buf[n] = tr.at(y, n) + em.at(t + 1, n) + beta.at(t + 1, n);
      beta.at(t, y) = lse(buf, L);
    }
  return beta;
}

void check_tags(std::span<const Tag> tags, std::size_t T) {
  if (tags.size() != T)
    throw DataError("gold has " + std::to_string(tags.size()) + " tags for " + std::to_string(T) + " characters");
  for (Tag t : tags)
    if (static_cast<std::size_t>(t) >= L) throw DataError("tag outside {B, M, E, S}");
}

}  // namespace

CrfParams CrfParams::init(ParamSet& params, int d_a, std::mt19937_64& rng) {
  CrfParams p;
  p.weight = params.add("crf.w", uniform_matrix(d_a, L, 0.1, rng));
  p.bias = params.add("crf.b", Matrix(1, L));
  p.transitions = params.add("crf.transitions", Matrix(L + 1, L));
  return p;
}

Var emissions(Var reps, const CrfParams& p) {
  Graph& g = *reps.graph;
  return ops::add(ops::matmul(reps, g.param(p.weight)), g.param(p.bias));
}

double sequence_score(const Matrix& em, const Matrix& tr, std::span<const Tag> tags) {
  check_shapes(em, tr);
  check_tags(tags, em.rows);
  double s = tr.at(kStartRow, static_cast<std::size_t>(tags[0]));
  for (std::size_t t = 0; t < em.rows; ++t) {
    const auto y = static_cast<std::size_t>(tags[t]);
    s += em.at(t, y);
    if (t > 0) s += tr.at(static_cast<std::size_t>(tags[t - 1]), y);
  }
  return s;
}

double log_partition(const Matrix& em, const Matrix& tr) {
  check_shapes(em, tr);
  const Matrix alpha = forward_table(em, tr);
  return lse(&alpha.data[(em.rows - 1) * L], L);
}

ViterbiResult viterbi(const Matrix& em, const Matrix& tr) {
  check_shapes(em, tr);
  const std::size_t T = em.rows;
  // best(t, y): best suffix score after t given y at t
  Matrix best(T, L);
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t y = 0; y < L; ++y) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < L; ++n) m = std::max(m, tr.at(y, n) + em.at(t + 1, n) + best.at(t + 1, n));
      best.at(t, y) = m;
    }
  // Walk forward taking the smallest label that keeps the optimum reachable.
  ViterbiResult out;
  std::size_t prev = kStartRow;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t arg = 0;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < L; ++y) {
      const double v = tr.at(prev, y) + em.at(t, y) + best.at(t, y);
      if (v > m) {
        m = v;
        arg = y;
      }
    }
    out.tags.push_back(static_cast<Tag>(arg));
    prev = arg;
  }
  out.score = sequence_score(em, tr, out.tags);
  return out;
}

Matrix marginals(const Matrix& em, const Matrix& tr) {
  check_shapes(em, tr);
  const Matrix alpha = forward_table(em, tr);
  const Matrix beta = backward_table(em, tr);
  const double log_z = lse(&alpha.data[(em.rows - 1) * L], L);
  Matrix mu(em.rows, L);
  for (std::size_t i = 0; i < mu.size(); ++i) mu.data[i] = std::exp(alpha.data[i] + beta.data[i] - log_z);
  return mu;
}

Var crf_nll(Var emissions, Var transitions, std::span<const Tag> gold) {
  Graph& g = *emissions.graph;
  const Matrix& em = emissions.value();
  const Matrix& tr = transitions.value();
  check_shapes(em, tr);
  check_tags(gold, em.rows);
  const double value = log_partition(em, tr) - sequence_score(em, tr, gold);
  const int ei = emissions.id, ti = transitions.id;
  std::vector<Tag> tags(gold.begin(), gold.end());
  return g.make_node(Matrix(1, 1, value), {ei, ti}, [ei, ti, tags](Graph& g, const Matrix&, const Matrix& go) {
    const Matrix& em = g.value(ei);
    const Matrix& tr = g.value(ti);
    const std::size_t T = em.rows;
    const double scale = go.data[0];
    const Matrix alpha = forward_table(em, tr);
    const Matrix beta = backward_table(em, tr);
    const double log_z = lse(&alpha.data[(T - 1) * L], L);
    if (g.requires_grad(ei)) {
      Matrix& ge = g.grad_of(ei);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t y = 0; y < L; ++y) {
          const double mu = std::exp(alpha.at(t, y) + beta.at(t, y) - log_z);
          const double gold_ind = static_cast<std::size_t>(tags[t]) == y ? 1.0 : 0.0;
          ge.at(t, y) += scale * (mu - gold_ind);
        }
    }
    if (g.requires_grad(ti)) {
      Matrix& gt = g.grad_of(ti);
      for (std::size_t y = 0; y < L; ++y) {
        const double mu0 = std::exp(alpha.at(0, y) + beta.at(0, y) - log_z);
        gt.at(kStartRow, y) += scale * (mu0 - (static_cast<std::size_t>(tags[0]) == y ? 1.0 : 0.0));
      }
      for (std::size_t t = 1; t < T; ++t)
        for (std::size_t p = 0; p < L; ++p)
          for (std::size_t y = 0; y < L; ++y) {
            const double xi = std::exp(alpha.at(t - 1, p) + tr.at(p, y) + em.at(t, y) + beta.at(t, y) - log_z);
            gt.at(p, y) += scale * xi;
          }
      for (std::size_t t = 1; t < T; ++t)
        gt.at(static_cast<std::size_t>(tags[t - 1]), static_cast<std::size_t>(tags[t])) -= scale;
    }
  });
}

}  // namespace crosswise
