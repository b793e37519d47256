#include <doctest.h>

#include <cmath>
#include <random>

#include "crosswise/memory.h"
#include "support.h"

using namespace crosswise;
using crosswise::testing::random_matrix;

TEST_CASE("equal dot products give equal attention") {
  ParamSet ps;
  Graph g(ps);
  const Var h = g.constant(Matrix::from_rows({{1.0, 0.0}}));
  const Var keys = g.constant(Matrix::from_rows({{0.5, 1.0}, {0.5, -3.0}}));
  const Candidate cands[] = {{0, ValueClass::B}, {1, ValueClass::S}};
  const Matrix p = attend(h, keys, cands).value();
  CHECK(p.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("dot products (0, ln 3) give (0.25, 0.75)") {
  ParamSet ps;
  Graph g(ps);
  const Var h = g.constant(Matrix::from_rows({{1.0, 1.0}}));
  const Var keys = g.constant(Matrix::from_rows({{0.0, 0.0}, {std::log(3.0), 0.0}}));
  const Candidate cands[] = {{0, ValueClass::B}, {1, ValueClass::E}};
  const Matrix p = attend(h, keys, cands).value();
  CHECK(p.at(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p.at(0, 1) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("attention needs at least one candidate") {
  ParamSet ps;
  Graph g(ps);
  CHECK_THROWS_AS(attend(g.constant(Matrix(1, 2)), g.constant(Matrix(1, 2)), {}), Error);
}

TEST_CASE("aggregate of one candidate is its value vector") {
  ParamSet ps;
  Graph g(ps);
  const Matrix values = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}});
  const Candidate only[] = {{0, ValueClass::E}};
  const Matrix out = aggregate(g.constant(Matrix::from_rows({{1.0}})), g.constant(values), only).value();
  CHECK(out.data == std::vector<double>{5, 6});
}

TEST_CASE("memory output lies in the convex hull of the candidates' values") {
  std::mt19937_64 rng(31);
  const std::size_t d = 5;
  const Matrix keys = random_matrix(6, d, rng);
  const Matrix values = random_matrix(4, d, rng);
  const Matrix chars = random_matrix(4, d, rng, 2.0);
  CandidateSet cands(4);
  cands[0] = {{0, ValueClass::S}, {1, ValueClass::B}};
  cands[1] = {{1, ValueClass::E}, {2, ValueClass::M}, {3, ValueClass::S}};
  cands[3] = {{5, ValueClass::B}};
  ParamSet ps;
  Graph g(ps);
  const Matrix out = memory_cell(g.constant(chars), g.constant(keys), g.constant(values), cands).value();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      if (cands[i].empty()) {
        CHECK(out.at(i, c) == 0.0);
        continue;
      }
      double lo = 1e300, hi = -1e300;
      for (const auto& cand : cands[i]) {
        lo = std::min(lo, values.at(static_cast<std::size_t>(cand.value), c));
        hi = std::max(hi, values.at(static_cast<std::size_t>(cand.value), c));
      }
      CHECK(out.at(i, c) >= lo - 1e-12);
      CHECK(out.at(i, c) <= hi + 1e-12);
    }
  }
}

TEST_CASE("memory cell gradients check against finite differences") {
  std::mt19937_64 rng(32);
  ParamSet ps;
  const ParamId keys = ps.add("keys", random_matrix(4, 3, rng));
  const ParamId values = ps.add("values", random_matrix(4, 3, rng));
  const ParamId chars = ps.add("chars", random_matrix(3, 3, rng));
  const ParamId probe = ps.add("probe", random_matrix(3, 3, rng));
  CandidateSet cands(3);
  cands[0] = {{0, ValueClass::B}, {2, ValueClass::S}};
  cands[2] = {{1, ValueClass::E}, {3, ValueClass::M}, {0, ValueClass::S}};
  const auto report = grad_check(
      [&](Graph& g) {
        const Var m = memory_cell(g.param(chars), g.param(keys), g.param(values), cands);
        return ops::sum(ops::mul(m, g.param(probe)));
      },
      ps, 1e-5, 1e-4);
  CHECK(report.passed);
}
