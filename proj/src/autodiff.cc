#include "crosswise/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace crosswise {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  m.rows = rows.size();
  m.cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw ShapeError("ragged matrix literal");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

Matrix Matrix::row(std::span<const double> values) {
  Matrix m(1, values.size());
  std::copy(values.begin(), values.end(), m.data.begin());
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << "(" << m.rows << "x" << m.cols << ")";
  return os.str();
}

ParamId ParamSet::add(std::string name, Matrix value) {
  params_.push_back({std::move(name), std::move(value)});
  return ParamId{params_.size() - 1};
}

ParamId ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return ParamId{i};
  throw DataError("no parameter named '" + name + "'");
}

GradBuffer::GradBuffer(const ParamSet& params) {
  grads_.reserve(params.size());
  for (const auto& p : params.all()) grads_.emplace_back(p.value.rows, p.value.cols);
}

void GradBuffer::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void GradBuffer::scale(double s) {
  for (auto& g : grads_)
    for (double& x : g.data) x *= s;
}

double GradBuffer::global_norm() const {
  double acc = 0.0;
  for (const auto& g : grads_)
    for (double x : g.data) acc += x * x;
  return std::sqrt(acc);
}

const Matrix& Var::value() const { return graph->value(id); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows != 1 || v.cols != 1) throw ShapeError("scalar() on " + shape_str(v));
  return v.data[0];
}

void check_finite(const Matrix& m, const char* what) {
  for (double x : m.data)
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
}

Graph::Graph(const ParamSet& params, GradBuffer* sink) : params_(params), sink_(sink) {
  if (sink_ && sink_->size() != params_.size())
    throw ShapeError("gradient buffer does not match parameter set");
}

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::input(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::param(ParamId id) {
  Node n;
  n.external = &params_[id].value;
  if (sink_) {
    n.external_grad = &(*sink_)[id];
    n.requires_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::make_node(Matrix value, std::vector<int> parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (int p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  if (!fn) n.requires_grad = false;
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

const Matrix& Graph::value(int id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Matrix& Graph::grad_of(int id) {
  Node& n = nodes_[id];
  if (n.external_grad) return *n.external_grad;
  if (!n.grad_ready) {
    const Matrix& v = value(id);
    n.grad = Matrix(v.rows, v.cols);
    n.grad_ready = true;
  }
  return n.grad;
}

const Matrix& Graph::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.external_grad) return *n.external_grad;
  return n.grad;
}

void Graph::backward(Var loss) {
  if (backward_done_) throw Error("backward() called twice on the same graph");
  const Matrix& lv = value(loss.id);
  if (lv.rows != 1 || lv.cols != 1) throw ShapeError("backward() needs a scalar loss, got " + shape_str(lv));
  backward_done_ = true;
  if (!nodes_[loss.id].requires_grad) return;
  grad_of(loss.id).data[0] += 1.0;
  std::vector<bool> reached(nodes_.size(), false);
  reached[loss.id] = true;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!reached[id] || !n.requires_grad) continue;
    for (int p : n.parents) reached[p] = true;
    if (n.backward && n.grad_ready) n.backward(*this, value(id), n.grad);
  }
}

namespace ops {
namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

Graph& same_graph(Var a, Var b) {
  if (a.graph != b.graph || !a.graph) throw Error("operands belong to different graphs");
  return *a.graph;
}

// out (n x m) += a (n x k) * b (k x m)
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.data.data() + i * m;
    const double* ar = a.data.data() + i * k;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = ar[t];
      if (av == 0.0) continue;
      const double* br = b.data.data() + t * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

// out (n x m) += a (n x k) * b^T, b is (m x k)
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows, k = a.cols, m = b.rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.data.data() + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.data.data() + j * k;
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ar[t] * br[t];
      out.data[i * m + j] += acc;
    }
  }
}

// out (k x m) += a^T * b, a is (n x k), b is (n x m)
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.data.data() + i * k;
    const double* br = b.data.data() + i * m;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = ar[t];
      if (av == 0.0) continue;
      double* o = out.data.data() + t * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols != bv.rows) shape_fail("matmul", av, bv);
  Matrix out(av.rows, bv.cols);
  gemm_nn(av, bv, out);
  const int ai = a.id, bi = b.id;
  return g.make_node(std::move(out), {ai, bi}, [ai, bi](Graph& g, const Matrix&, const Matrix& go) {
    if (g.requires_grad(ai)) gemm_nt(go, g.value(bi), g.grad_of(ai));
    if (g.requires_grad(bi)) gemm_tn(g.value(ai), go, g.grad_of(bi));
  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols != bv.cols) shape_fail("matmul_nt", av, bv);
  Matrix out(av.rows, bv.rows);
  gemm_nt(av, bv, out);
  const int ai = a.id, bi = b.id;
  return g.make_node(std::move(out), {ai, bi}, [ai, bi](Graph& g, const Matrix&, const Matrix& go) {
    // out = a b^T: da = go b, db = go^T a
    if (g.requires_grad(ai)) gemm_nn(go, g.value(bi), g.grad_of(ai));
    if (g.requires_grad(bi)) gemm_tn(go, g.value(ai), g.grad_of(bi));
  });
}

namespace {

// Elementwise binary op; `b` may be a single row broadcast over `a`.
// `bwd(a, b, go, da, db)` writes the local partials times go.
template <typename Fwd, typename Bwd>
Var binary_elementwise(const char* name, Var a, Var b, Fwd fwd, Bwd bwd) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const bool bcast = !av.same_shape(bv);
  if (bcast && !(bv.rows == 1 && bv.cols == av.cols)) shape_fail(name, av, bv);
  Matrix out(av.rows, av.cols);
  for (std::size_t r = 0; r < av.rows; ++r)
    for (std::size_t c = 0; c < av.cols; ++c) out.at(r, c) = fwd(av.at(r, c), bv.at(bcast ? 0 : r, c));
  const int ai = a.id, bi = b.id;
  return g.make_node(std::move(out), {ai, bi}, [ai, bi, bcast, bwd](Graph& g, const Matrix&, const Matrix& go) {
    const Matrix& av = g.value(ai);
    const Matrix& bv = g.value(bi);
    Matrix* ga = g.requires_grad(ai) ? &g.grad_of(ai) : nullptr;
    Matrix* gb = g.requires_grad(bi) ? &g.grad_of(bi) : nullptr;
    for (std::size_t r = 0; r < av.rows; ++r) {
      const std::size_t br = bcast ? 0 : r;
      for (std::size_t c = 0; c < av.cols; ++c) {
        double da = 0.0, db = 0.0;
        bwd(av.at(r, c), bv.at(br, c), go.at(r, c), da, db);
        if (ga) ga->at(r, c) += da;
        if (gb) gb->at(br, c) += db;
      }
    }
  });
}

// Elementwise unary op whose derivative is expressed through its output.
template <typename Fwd, typename Deriv>
Var unary_elementwise(Var a, Fwd fwd, Deriv deriv) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) out.data[i] = fwd(av.data[i]);
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai, deriv](Graph& g, const Matrix& y, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (std::size_t i = 0; i < y.size(); ++i) ga.data[i] += go.data[i] * deriv(y.data[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double go, double& da, double& db) { da = go; db = go; });
}

Var sub(Var a, Var b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double go, double& da, double& db) { da = go; db = -go; });
}

Var mul(Var a, Var b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double go, double& da, double& db) { da = go * y; db = go * x; });
}

Var scale(Var a, double s) {
  Graph& g = *a.graph;
  Matrix out = a.value();
  for (double& x : out.data) x *= s;
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai, s](Graph& g, const Matrix&, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (std::size_t i = 0; i < go.size(); ++i) ga.data[i] += s * go.data[i];
  });
}

Var mul_scalar(Var a, Var s) {
  Graph& g = same_graph(a, s);
  const Matrix& sv = s.value();
  if (sv.rows != 1 || sv.cols != 1) shape_fail("mul_scalar", a.value(), sv);
  const double k = sv.data[0];
  Matrix out = a.value();
  for (double& x : out.data) x *= k;
  const int ai = a.id, si = s.id;
  return g.make_node(std::move(out), {ai, si}, [ai, si](Graph& g, const Matrix&, const Matrix& go) {
    const Matrix& av = g.value(ai);
    if (g.requires_grad(ai)) {
      const double k = g.value(si).data[0];
      Matrix& ga = g.grad_of(ai);
      for (std::size_t i = 0; i < go.size(); ++i) ga.data[i] += k * go.data[i];
    }
    if (g.requires_grad(si)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < go.size(); ++i) acc += av.data[i] * go.data[i];
      g.grad_of(si).data[0] += acc;
    }
  });
}

Var add_scalar(Var a, double s) {
  Graph& g = *a.graph;
  Matrix out = a.value();
  for (double& x : out.data) x += s;
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai](Graph& g, const Matrix&, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (std::size_t i = 0; i < go.size(); ++i) ga.data[i] += go.data[i];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  Graph& g = *parts[0].graph;
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<int> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.graph != &g) throw Error("operands belong to different graphs");
    if (p.rows() != rows) shape_fail("concat_cols", parts[0].value(), p.value());
    ids.push_back(p.id);
    offsets.push_back(cols);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Matrix& pv = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(pv.row_span(r).begin(), pv.row_span(r).end(), out.row_span(r).begin() + offsets[k]);
  }
  auto parents = ids;
  return g.make_node(std::move(out), std::move(parents), [ids, offsets](Graph& g, const Matrix&, const Matrix& go) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Matrix& gp = g.grad_of(ids[k]);
      for (std::size_t r = 0; r < gp.rows; ++r)
        for (std::size_t c = 0; c < gp.cols; ++c) gp.at(r, c) += go.at(r, offsets[k] + c);
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_cols(parts);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  Graph& g = *parts[0].graph;
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  std::vector<int> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.graph != &g) throw Error("operands belong to different graphs");
    if (p.cols() != cols) shape_fail("concat_rows", parts[0].value(), p.value());
    ids.push_back(p.id);
    offsets.push_back(rows);
    rows += p.rows();
  }
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Matrix& pv = parts[k].value();
    std::copy(pv.data.begin(), pv.data.end(), out.data.begin() + offsets[k] * cols);
  }
  auto parents = ids;
  return g.make_node(std::move(out), std::move(parents), [ids, offsets](Graph& g, const Matrix&, const Matrix& go) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Matrix& gp = g.grad_of(ids[k]);
      const double* src = go.data.data() + offsets[k] * go.cols;
      for (std::size_t i = 0; i < gp.size(); ++i) gp.data[i] += src[i];
    }
  });
}

Var gather_rows(Var table, std::span<const int> rows) {
  Graph& g = *table.graph;
  const Matrix& tv = table.value();
  Matrix out(rows.size(), tv.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= tv.rows)
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " outside " + shape_str(tv));
    const auto src = tv.row_span(rows[i]);
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  const int ti = table.id;
  std::vector<int> idx(rows.begin(), rows.end());
  return g.make_node(std::move(out), {ti}, [ti, idx = std::move(idx)](Graph& g, const Matrix&, const Matrix& go) {
    Matrix& gt = g.grad_of(ti);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* dst = gt.data.data() + static_cast<std::size_t>(idx[i]) * gt.cols;
      for (std::size_t c = 0; c < gt.cols; ++c) dst[c] += go.at(i, c);
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  if (begin + count > av.rows)
    throw ShapeError("slice_rows [" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + shape_str(av));
  Matrix out(count, av.cols);
  std::copy(av.data.begin() + begin * av.cols, av.data.begin() + (begin + count) * av.cols, out.data.begin());
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai, begin](Graph& g, const Matrix&, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    double* dst = ga.data.data() + begin * ga.cols;
    for (std::size_t i = 0; i < go.size(); ++i) dst[i] += go.data[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  if (begin + count > av.cols)
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + shape_str(av));
  Matrix out(av.rows, count);
  for (std::size_t r = 0; r < av.rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out.at(r, c) = av.at(r, begin + c);
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai, begin](Graph& g, const Matrix&, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (std::size_t r = 0; r < go.rows; ++r)
      for (std::size_t c = 0; c < go.cols; ++c) ga.at(r, begin + c) += go.at(r, c);
  });
}

Var tanh(Var a) {
  return unary_elementwise(a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary_elementwise(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double y) { return y * (1.0 - y); });
}

namespace {

double row_logsumexp(std::span<const double> row) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : row) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : row) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace

Var softmax_row(Var a) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  Matrix out(av.rows, av.cols);
  for (std::size_t r = 0; r < av.rows; ++r) {
    const double lse = row_logsumexp(av.row_span(r));
    for (std::size_t c = 0; c < av.cols; ++c) out.at(r, c) = std::exp(av.at(r, c) - lse);
  }
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai](Graph& g, const Matrix& y, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (std::size_t r = 0; r < y.rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols; ++c) dot += go.at(r, c) * y.at(r, c);
      for (std::size_t c = 0; c < y.cols; ++c) ga.at(r, c) += y.at(r, c) * (go.at(r, c) - dot);
    }
  });
}

Var log_softmax_row(Var a) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  Matrix out(av.rows, av.cols);
  for (std::size_t r = 0; r < av.rows; ++r) {
    const double lse = row_logsumexp(av.row_span(r));
    for (std::size_t c = 0; c < av.cols; ++c) out.at(r, c) = av.at(r, c) - lse;
  }
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai](Graph& g, const Matrix& y, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (std::size_t r = 0; r < y.rows; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < y.cols; ++c) total += go.at(r, c);
      for (std::size_t c = 0; c < y.cols; ++c) ga.at(r, c) += go.at(r, c) - std::exp(y.at(r, c)) * total;
    }
  });
}

Var logsumexp_row(Var a) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  Matrix out(av.rows, 1);
  for (std::size_t r = 0; r < av.rows; ++r) out.at(r, 0) = row_logsumexp(av.row_span(r));
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai](Graph& g, const Matrix& y, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    const Matrix& av = g.value(ai);
    for (std::size_t r = 0; r < av.rows; ++r)
      for (std::size_t c = 0; c < av.cols; ++c) ga.at(r, c) += go.at(r, 0) * std::exp(av.at(r, c) - y.at(r, 0));
  });
}

Var sum(Var a) {
  Graph& g = *a.graph;
  double acc = 0.0;
  for (double x : a.value().data) acc += x;
  Matrix out(1, 1, acc);
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai](Graph& g, const Matrix&, const Matrix& go) {
    Matrix& ga = g.grad_of(ai);
    for (double& x : ga.data) x += go.data[0];
  });
}

Var pick(Var a, std::size_t r, std::size_t c) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  if (r >= av.rows || c >= av.cols)
    throw ShapeError("pick (" + std::to_string(r) + "," + std::to_string(c) + ") outside " + shape_str(av));
  Matrix out(1, 1, av.at(r, c));
  const int ai = a.id;
  return g.make_node(std::move(out), {ai}, [ai, r, c](Graph& g, const Matrix&, const Matrix& go) {
    g.grad_of(ai).at(r, c) += go.data[0];
  });
}

}  // namespace ops

GradCheckReport grad_check(const LossBuilder& f, ParamSet& params, double h, double tol) {
  GradBuffer analytic(params);
  {
    Graph g(params, &analytic);
    Var loss = f(g);
    g.backward(loss);
  }
  auto evaluate = [&] {
    Graph g(params);
    return f(g).scalar();
  };
  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& value = params.all()[p].value;
    const Matrix& grad = analytic.all()[p];
    GradCheckEntry entry{params.all()[p].name, 0.0, 0.0};
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value.data[i];
      value.data[i] = saved + h;
      const double up = evaluate();
      value.data[i] = saved - h;
      const double down = evaluate();
      value.data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = grad.data[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max(std::abs(a) + std::abs(numeric), 1e-6);
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace crosswise
