#include "miarec/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "miarec/error.hpp"

namespace miarec::ad {

const Dense& Var::value() const { return tape->value(id); }
const Dense& Var::grad() const { return tape->grad(id); }

Var Tape::constant(Dense value) {
  nodes_.push_back({std::move(value), Dense(), false, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Dense value) {
  nodes_.push_back({std::move(value), Dense(), true, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Dense value, const std::vector<Var>& inputs, Backward backward) {
  const bool needs =
      std::any_of(inputs.begin(), inputs.end(), [this](Var v) { return requires_grad(v.id); });
  nodes_.push_back({std::move(value), Dense(), needs, needs ? std::move(backward) : nullptr});
  return {this, nodes_.size() - 1};
}

Dense& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Dense(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Dense& g) {
  if (!requires_grad(id)) return;
  Dense& buf = grad_buffer(id);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

void Tape::backward(Var root) {
  if (root.value().size() != 1) throw DimensionError("backward needs a 1x1 root");
  for (auto& n : nodes_) n.grad = Dense();
  grad_buffer(root.id)[0] = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backward && !n.grad.empty()) n.backward(*this, id);
  }
}

namespace {

Tape& tape_of(std::initializer_list<Var> vars) {
  Tape* t = vars.begin()->tape;
  for (Var v : vars) {
    if (v.tape != t) throw DimensionError("variables from different tapes");
  }
  return *t;
}

template <typename F, typename D>
Var unary(Var a, F f, D df) {
  Tape& t = *a.tape;
  const Dense& x = a.value();
  Dense out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return t.record(std::move(out), {a}, [a, df](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    const Dense& x = tp.value(a.id);
    const Dense& y = tp.value(self);
    Dense& ga = tp.grad_buffer(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

Var matmul_bt(Var a, Var b) {
  Tape& t = tape_of({a, b});
  const Dense& av = a.value();
  const Dense& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_bt: inner widths " + std::to_string(av.cols()) + " and " +
                         std::to_string(bv.cols()));
  }
  Dense out(av.rows(), bv.rows());
  kernels::matmul_bt(av, bv, out);
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    if (tp.requires_grad(a.id)) {
      Dense da(g.rows(), tp.value(b.id).cols());
      kernels::matmul(g, tp.value(b.id), da);
      tp.accumulate(a.id, da);
    }
    if (tp.requires_grad(b.id)) {
      Dense db(g.cols(), tp.value(a.id).cols());
      kernels::matmul_at(g, tp.value(a.id), db);
      tp.accumulate(b.id, db);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of({a, b});
  Dense out = miarec::add(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    tp.accumulate(a.id, tp.grad(self));
    tp.accumulate(b.id, tp.grad(self));
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of({a, b});
  Dense out = miarec::subtract(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    tp.accumulate(a.id, tp.grad(self));
    tp.accumulate(b.id, miarec::scale(tp.grad(self), -1.0));
  });
}

Var add_row(Var a, Var b) {
  Tape& t = tape_of({a, b});
  const Dense& av = a.value();
  const Dense& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw DimensionError("add_row: bias width " + std::to_string(bv.cols()) + " vs " +
                         std::to_string(av.cols()));
  }
  Dense out(av);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    tp.accumulate(a.id, g);
    if (tp.requires_grad(b.id)) {
      Dense& gb = tp.grad_buffer(b.id);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
    }
  });
}

Var scale(Var a, double s) {
  return unary(
      a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  Tape& t = *parts.front().tape;
  const std::size_t n = parts.front().rows();
  std::size_t width = 0;
  for (Var p : parts) {
    if (p.rows() != n) throw DimensionError("concat_cols: row counts differ");
    width += p.cols();
  }
  Dense out(n, width);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Dense& v = p.value();
    for (std::size_t r = 0; r < n; ++r)
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + offset);
    offset += v.cols();
  }
  return t.record(std::move(out), parts, [parts](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    std::size_t offset = 0;
    for (Var p : parts) {
      const std::size_t w = tp.value(p.id).cols();
      if (tp.requires_grad(p.id)) {
        Dense& gp = tp.grad_buffer(p.id);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < w; ++c) gp(r, c) += g(r, offset + c);
      }
      offset += w;
    }
  });
}

Var mul_const(Var a, const Dense& c) {
  Tape& t = *a.tape;
  require_same_shape(a.value(), c, "mul_const");
  Dense out(a.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  return t.record(std::move(out), {a}, [a, c](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    Dense& ga = tp.grad_buffer(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c[i];
  });
}

Var gather_rows(Var a, std::vector<std::size_t> index) {
  Tape& t = *a.tape;
  const Dense& av = a.value();
  Dense out(index.size(), av.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= av.rows()) throw DimensionError("gather_rows: index out of range");
    std::copy(av.row(index[r]).begin(), av.row(index[r]).end(), out.row(r).begin());
  }
  return t.record(std::move(out), {a}, [a, index = std::move(index)](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    Dense& ga = tp.grad_buffer(a.id);
    for (std::size_t r = 0; r < index.size(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(index[r], c) += g(r, c);
  });
}

Var column(Var a, std::size_t c) {
  Tape& t = *a.tape;
  const Dense& av = a.value();
  if (c >= av.cols()) throw DimensionError("column: index out of range");
  Dense out(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) out[r] = av(r, c);
  return t.record(std::move(out), {a}, [a, c](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    Dense& ga = tp.grad_buffer(a.id);
    for (std::size_t r = 0; r < g.rows(); ++r) ga(r, c) += g[r];
  });
}

Var row_dot(Var a, Var b) {
  Tape& t = tape_of({a, b});
  require_same_shape(a.value(), b.value(), "row_dot");
  const Dense& av = a.value();
  const Dense& bv = b.value();
  Dense out(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) out[r] = dot(av.row(r), bv.row(r));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    const Dense& av = tp.value(a.id);
    const Dense& bv = tp.value(b.id);
    if (tp.requires_grad(a.id)) {
      Dense& ga = tp.grad_buffer(a.id);
      for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < av.cols(); ++c) ga(r, c) += g[r] * bv(r, c);
    }
    if (tp.requires_grad(b.id)) {
      Dense& gb = tp.grad_buffer(b.id);
      for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < av.cols(); ++c) gb(r, c) += g[r] * av(r, c);
    }
  });
}

Var row_softmax(Var a) {
  Tape& t = *a.tape;
  const Dense& av = a.value();
  Dense out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto s = softmax_vec(av.row(r));
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return t.record(std::move(out), {a}, [a](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    const Dense& y = tp.value(self);
    Dense& ga = tp.grad_buffer(a.id);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const double gy = dot(g.row(r), y.row(r));
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += y(r, c) * (g(r, c) - gy);
    }
  });
}

Var row_scale(Var a, Var s) {
  Tape& t = tape_of({a, s});
  const Dense& av = a.value();
  const Dense& sv = s.value();
  if (sv.rows() != av.rows() || sv.cols() != 1) throw DimensionError("row_scale: scale shape");
  Dense out(av);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) *= sv[r];
  return t.record(std::move(out), {a, s}, [a, s](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    const Dense& av = tp.value(a.id);
    const Dense& sv = tp.value(s.id);
    if (tp.requires_grad(a.id)) {
      Dense& ga = tp.grad_buffer(a.id);
      for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < av.cols(); ++c) ga(r, c) += g(r, c) * sv[r];
    }
    if (tp.requires_grad(s.id)) {
      Dense& gs = tp.grad_buffer(s.id);
      for (std::size_t r = 0; r < av.rows(); ++r) gs[r] += dot(g.row(r), av.row(r));
    }
  });
}

Var mean(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("mean of nothing");
  Tape& t = *parts.front().tape;
  Dense out(parts.front().rows(), parts.front().cols());
  for (Var p : parts) {
    require_same_shape(out, p.value(), "mean");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.value()[i];
  }
  const double inv = 1.0 / static_cast<double>(parts.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
  return t.record(std::move(out), parts, [parts, inv](Tape& tp, std::size_t self) {
    const Dense g = miarec::scale(tp.grad(self), inv);
    for (Var p : parts) tp.accumulate(p.id, g);
  });
}

Var sum_squares(Var a) {
  Tape& t = *a.tape;
  Dense out(1, 1, l2_norm_sq(a.value()));
  return t.record(std::move(out), {a}, [a](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const Dense& av = tp.value(a.id);
    Dense& ga = tp.grad_buffer(a.id);
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += 2.0 * g * av[i];
  });
}

Var neg_log_sigmoid_sum(Var x) {
  Tape& t = *x.tape;
  const Dense& xv = x.value();
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) total -= log_sigmoid(xv[i]);
  return t.record(Dense(1, 1, total), {x}, [x](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const Dense& xv = tp.value(x.id);
    Dense& gx = tp.grad_buffer(x.id);
    // d/dx -log sigmoid(x) = -(1 - sigmoid(x)) = -sigmoid(-x)
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] -= g * sigmoid(-xv[i]);
  });
}

Var spmm(std::shared_ptr<const kernels::SparseRows> adj, Var coef, Var h) {
  Tape& t = tape_of({coef, h});
  const Dense& cv = coef.value();
  const Dense& hv = h.value();
  if (cv.size() != adj->nnz()) throw DimensionError("spmm: coefficient count");
  if (hv.rows() != adj->n_cols) throw DimensionError("spmm: feature rows");
  Dense out(adj->n_rows, hv.cols());
  kernels::spmm(*adj, cv.values(), hv, out);
  return t.record(std::move(out), {coef, h}, [adj, coef, h](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    if (tp.requires_grad(h.id)) {
      kernels::spmm_transpose(*adj, tp.value(coef.id).values(), g, tp.grad_buffer(h.id));
    }
    if (tp.requires_grad(coef.id)) {
      Dense gc(adj->nnz(), 1);
      kernels::spmm_coef_grad(*adj, g, tp.value(h.id), std::span<double>(gc.data(), gc.size()));
      tp.accumulate(coef.id, gc);
    }
  });
}

Var edge_scores(std::shared_ptr<const kernels::SparseRows> adj, Var z, Var a) {
  Tape& t = tape_of({z, a});
  const Dense& zv = z.value();
  const Dense& av = a.value();
  const std::size_t w = zv.cols();
  if (av.size() != 2 * w) throw DimensionError("edge_scores: attention vector width");
  if (zv.rows() != adj->n_rows || zv.rows() != adj->n_cols) {
    throw DimensionError("edge_scores: node count");
  }
  std::span<const double> a_src(av.data(), w), a_dst(av.data() + w, w);
  std::vector<double> src(zv.rows()), dst(zv.rows());
  for (std::size_t i = 0; i < zv.rows(); ++i) {
    src[i] = dot(a_src, zv.row(i));
    dst[i] = dot(a_dst, zv.row(i));
  }
  Dense out(adj->nnz(), 1);
  for (std::size_t i = 0; i < adj->n_rows; ++i)
    for (std::size_t k = adj->row_begin(i); k < adj->row_end(i); ++k)
      out[k] = src[i] + dst[adj->targets[k]];
  return t.record(std::move(out), {z, a}, [adj, z, a](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    const Dense& zv = tp.value(z.id);
    const Dense& av = tp.value(a.id);
    const std::size_t w = zv.cols();
    // Per-node totals of upstream gradient as source and as target.
    std::vector<double> g_src(zv.rows(), 0.0), g_dst(zv.rows(), 0.0);
    for (std::size_t i = 0; i < adj->n_rows; ++i)
      for (std::size_t k = adj->row_begin(i); k < adj->row_end(i); ++k) {
        g_src[i] += g[k];
        g_dst[adj->targets[k]] += g[k];
      }
    if (tp.requires_grad(z.id)) {
      Dense& gz = tp.grad_buffer(z.id);
      for (std::size_t i = 0; i < zv.rows(); ++i)
        for (std::size_t c = 0; c < w; ++c) gz(i, c) += g_src[i] * av[c] + g_dst[i] * av[w + c];
    }
    if (tp.requires_grad(a.id)) {
      Dense& ga = tp.grad_buffer(a.id);
      for (std::size_t i = 0; i < zv.rows(); ++i)
        for (std::size_t c = 0; c < w; ++c) {
          ga[c] += g_src[i] * zv(i, c);
          ga[w + c] += g_dst[i] * zv(i, c);
        }
    }
  });
}

Var segment_softmax(std::shared_ptr<const kernels::SparseRows> adj, Var e) {
  Tape& t = *e.tape;
  const Dense& ev = e.value();
  if (ev.size() != adj->nnz()) throw DimensionError("segment_softmax: entry count");
  Dense out(ev.rows(), ev.cols());
  for (std::size_t i = 0; i < adj->n_rows; ++i) {
    const std::size_t b = adj->row_begin(i), n = adj->degree(i);
    auto s = softmax_vec(std::span<const double>(ev.data() + b, n));
    std::copy(s.begin(), s.end(), out.data() + b);
  }
  return t.record(std::move(out), {e}, [adj, e](Tape& tp, std::size_t self) {
    const Dense& g = tp.grad(self);
    const Dense& y = tp.value(self);
    Dense& ge = tp.grad_buffer(e.id);
    for (std::size_t i = 0; i < adj->n_rows; ++i) {
      double gy = 0.0;
      for (std::size_t k = adj->row_begin(i); k < adj->row_end(i); ++k) gy += g[k] * y[k];
      for (std::size_t k = adj->row_begin(i); k < adj->row_end(i); ++k) ge[k] += y[k] * (g[k] - gy);
    }
  });
}

}  // namespace miarec::ad
