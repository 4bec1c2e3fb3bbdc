#pragma once

// Minimal reverse-mode differentiation over Dense matrices. A Tape records
// every operation in evaluation order; backward() walks it in reverse.

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "miarec/dense.hpp"
#include "miarec/kernels.hpp"

namespace miarec::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Dense& value() const;
  /// Gradient accumulated by the last backward(); zero-shaped if never touched.
  const Dense& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Var constant(Dense value);
  Var parameter(Dense value);
  Var record(Dense value, const std::vector<Var>& inputs, Backward backward);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);

  const Dense& value(std::size_t id) const { return nodes_[id].value; }
  const Dense& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Mutable gradient buffer, zero-initialised on first use.
  Dense& grad_buffer(std::size_t id);
  void accumulate(std::size_t id, const Dense& g);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Dense value;
    Dense grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
};

// a * b^T
Var matmul_bt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// a + 1 * b for a row vector b (1 x cols).
Var add_row(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
Var tanh(Var a);
Var leaky_relu(Var a, double slope);
Var concat_cols(const std::vector<Var>& parts);
/// Elementwise product with a constant of the same shape.
Var mul_const(Var a, const Dense& c);
/// Rows of `a` selected by `index`, in order.
Var gather_rows(Var a, std::vector<std::size_t> index);
/// Column c of a as n x 1.
Var column(Var a, std::size_t c);
/// Per-row dot products of equally shaped a and b, n x 1.
Var row_dot(Var a, Var b);
/// Softmax across the columns of each row.
Var row_softmax(Var a);
/// Row i of a multiplied by s(i, 0).
Var row_scale(Var a, Var s);
/// Mean of equally shaped matrices.
Var mean(const std::vector<Var>& parts);
/// 1x1 sum of squared entries.
Var sum_squares(Var a);
/// 1x1 value -sum_i log sigmoid(x_i).
Var neg_log_sigmoid_sum(Var x);
/// Sparse aggregation: out_i = sum_k coef_k h_{targets_k}; coef is nnz x 1.
Var spmm(std::shared_ptr<const kernels::SparseRows> adj, Var coef, Var h);
/// Edge scores s_k = a[0:w] . z_{row(k)} + a[w:2w] . z_{targets_k}; a is 1 x 2w.
Var edge_scores(std::shared_ptr<const kernels::SparseRows> adj, Var z, Var a);
/// Softmax of an nnz x 1 vector within each row segment of adj.
Var segment_softmax(std::shared_ptr<const kernels::SparseRows> adj, Var e);

}  // namespace miarec::ad
