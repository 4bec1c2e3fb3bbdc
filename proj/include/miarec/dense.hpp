#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace miarec {

/// Row-major matrix of doubles. Vectors are 1 x n or n x 1 matrices.
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t rows, std::size_t cols, double fill = 0.0);
  Dense(std::size_t rows, std::size_t cols, std::vector<double> values);
  Dense(std::initializer_list<std::initializer_list<double>> rows);

  static Dense row_vector(std::span<const double> values);
  static Dense identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  const std::vector<double>& values() const noexcept { return values_; }

  void fill(double v);
  bool same_shape(const Dense& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const Dense& a, const Dense& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Plain value-returning arithmetic. Shape mismatches throw DimensionError.
Dense matmul(const Dense& a, const Dense& b);
Dense transpose(const Dense& a);
Dense concat_rows(const Dense& top, const Dense& bottom);
Dense concat_cols(const Dense& left, const Dense& right);
Dense add(const Dense& a, const Dense& b);
Dense subtract(const Dense& a, const Dense& b);
Dense scale(const Dense& a, double s);
Dense relu(const Dense& a);
Dense tanh(const Dense& a);
Dense sigmoid(const Dense& a);
double sigmoid(double x);
/// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x);
/// Softmax over all entries, max-subtracted.
Dense softmax_vec(const Dense& a);
std::vector<double> softmax_vec(std::span<const double> a);
double l2_norm_sq(const Dense& a);
double dot(std::span<const double> a, std::span<const double> b);
double max_abs_diff(const Dense& a, const Dense& b);

void require_same_shape(const Dense& a, const Dense& b, const char* what);

}  // namespace miarec
