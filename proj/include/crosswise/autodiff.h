#pragma once

// Minimal define-by-run reverse-mode differentiation over dense row-major
// matrices of doubles. A Graph is built per sentence and confined to one
// thread; trainable tensors live in a ParamSet and are only read while a
// graph exists, so several graphs may share one ParamSet concurrently.

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crosswise/error.h"

namespace crosswise {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix row(std::span<const double> values);
  static Matrix identity(std::size_t n);

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row_span(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row_span(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

std::string shape_str(const Matrix& m);

struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

struct Parameter {
  std::string name;
  Matrix value;
};

// Ordered collection of trainable tensors. Order is stable and is the order
// used by serialization and by the optimizer.
class ParamSet {
 public:
  ParamId add(std::string name, Matrix value);
  Parameter& operator[](ParamId id) { return params_[id.index]; }
  const Parameter& operator[](ParamId id) const { return params_[id.index]; }
  std::size_t size() const { return params_.size(); }
  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  ParamId find(const std::string& name) const;

 private:
  std::vector<Parameter> params_;
};

// Dense gradient accumulator matching a ParamSet.
class GradBuffer {
 public:
  explicit GradBuffer(const ParamSet& params);
  Matrix& operator[](ParamId id) { return grads_[id.index]; }
  const Matrix& operator[](ParamId id) const { return grads_[id.index]; }
  std::size_t size() const { return grads_.size(); }
  void zero();
  void scale(double s);
  double global_norm() const;
  std::vector<Matrix>& all() { return grads_; }
  const std::vector<Matrix>& all() const { return grads_; }

 private:
  std::vector<Matrix> grads_;
};

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
  double scalar() const;
};

class Graph {
 public:
  // Called with the node's output value and gradient; implementations add
  // into the parents' gradients through Graph::grad_of.
  using BackwardFn = std::function<void(Graph&, const Matrix& out, const Matrix& out_grad)>;

  // Gradients for param() leaves go to `sink`; without a sink the graph is
  // inference-only and parameters are treated as constants.
  explicit Graph(const ParamSet& params, GradBuffer* sink = nullptr);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  // Leaf with its own gradient storage, readable after backward().
  Var input(Matrix value);
  Var param(ParamId id);

  // Registers a custom op. `fn` may be empty for non-differentiable nodes.
  Var make_node(Matrix value, std::vector<int> parents, BackwardFn fn);

  const Matrix& value(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Gradient storage of node `id`, created as zeros on first use.
  Matrix& grad_of(int id);
  const Matrix& grad(Var v) const;

  void backward(Var loss);
  std::size_t size() const { return nodes_.size(); }
  const ParamSet& params() const { return params_; }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;  // param leaves
    Matrix grad;
    Matrix* external_grad = nullptr;  // param leaves with a sink
    std::vector<int> parents;
    BackwardFn backward;
    bool requires_grad = false;
    bool grad_ready = false;
  };

  const ParamSet& params_;
  GradBuffer* sink_;
  // deque keeps value references stable while the graph grows
  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

// Finite-value guard: throws NumericError naming `what` on NaN or Inf.
void check_finite(const Matrix& m, const char* what);

namespace ops {

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
// Same shapes, or b a single row broadcast over the rows of a.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
// a times the 1x1 variable s.
Var mul_scalar(Var a, Var s);
Var add_scalar(Var a, double s);
Var concat_cols(std::span<const Var> parts);
Var concat_cols(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var table, std::span<const int> rows);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var tanh(Var a);
Var sigmoid(Var a);
Var softmax_row(Var a);
Var log_softmax_row(Var a);
// (rows x 1) of per-row log-sum-exp.
Var logsumexp_row(Var a);
// 1x1 sum of all entries.
Var sum(Var a);
// 1x1 entry (r, c).
Var pick(Var a, std::size_t r, std::size_t c);

}  // namespace ops

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

// Builds a scalar loss from a fresh graph; must be deterministic.
using LossBuilder = std::function<Var(Graph&)>;

// Compares backward() gradients for every parameter in `params` against
// central differences of step h. Relative error per entry is
// |a - n| / max(|a| + |n|, 1e-6).
GradCheckReport grad_check(const LossBuilder& f, ParamSet& params, double h, double tol);

}  // namespace crosswise
