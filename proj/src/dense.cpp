#include "miarec/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "miarec/error.hpp"
#include "miarec/kernels.hpp"

namespace miarec {

namespace {

std::string shape_str(const Dense& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

template <typename F>
Dense map(const Dense& a, F f) {
  Dense out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

Dense::Dense(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Dense::Dense(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DimensionError("value count " + std::to_string(values_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Dense::Dense(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Dense Dense::row_vector(std::span<const double> values) {
  return Dense(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Dense Dense::identity(std::size_t n) {
  Dense out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

void Dense::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Dense::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Dense& a, const Dense& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape " + shape_str(a) + " vs " + shape_str(b));
  }
}

Dense matmul(const Dense& a, const Dense& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  Dense out(a.rows(), b.cols());
  kernels::matmul(a, b, out);
  return out;
}

Dense transpose(const Dense& a) {
  Dense out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

Dense concat_rows(const Dense& top, const Dense& bottom) {
  if (top.cols() != bottom.cols()) {
    throw DimensionError("concat_rows: " + shape_str(top) + " over " + shape_str(bottom));
  }
  std::vector<double> v(top.values());
  v.insert(v.end(), bottom.values().begin(), bottom.values().end());
  return Dense(top.rows() + bottom.rows(), top.cols(), std::move(v));
}

Dense concat_cols(const Dense& left, const Dense& right) {
  if (left.rows() != right.rows()) {
    throw DimensionError("concat_cols: " + shape_str(left) + " beside " + shape_str(right));
  }
  Dense out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(left.row(r).begin(), left.row(r).end(), dst.begin());
    std::copy(right.row(r).begin(), right.row(r).end(), dst.begin() + left.cols());
  }
  return out;
}

Dense add(const Dense& a, const Dense& b) {
  require_same_shape(a, b, "add");
  Dense out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Dense subtract(const Dense& a, const Dense& b) {
  require_same_shape(a, b, "subtract");
  Dense out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Dense scale(const Dense& a, double s) {
  return map(a, [s](double v) { return v * s; });
}

Dense relu(const Dense& a) {
  return map(a, [](double v) { return v > 0.0 ? v : 0.0; });
}

Dense tanh(const Dense& a) {
  return map(a, [](double v) { return std::tanh(v); });
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

Dense sigmoid(const Dense& a) {
  return map(a, [](double v) { return sigmoid(v); });
}

std::vector<double> softmax_vec(std::span<const double> a) {
  std::vector<double> out(a.size());
  if (a.empty()) return out;
  const double mx = *std::max_element(a.begin(), a.end());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::exp(a[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Dense softmax_vec(const Dense& a) {
  return Dense(a.rows(), a.cols(), softmax_vec(std::span<const double>(a.values())));
}

double l2_norm_sq(const Dense& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: width " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs_diff(const Dense& a, const Dense& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace miarec
