#pragma once

// Data-parallel inner loops of the model. Every kernel has a serial reference
// in `serial::` and an OpenMP version in `omp::`; both produce bitwise-identical
// results because each output element is reduced in the same fixed order.

#include <cstddef>
#include <span>
#include <vector>

#include "miarec/dense.hpp"

namespace miarec::kernels {

/// Compressed rows of (source row -> sampled target rows). Entry k of row i is
/// targets[k] for k in [offsets[i], offsets[i+1]). The reverse index lists, for
/// each target j, the entry ids k pointing at it in increasing k order.
struct SparseRows {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> offsets;  // n_rows + 1
  std::vector<std::size_t> targets;  // nnz
  std::vector<std::size_t> rev_offsets;  // n_cols + 1
  std::vector<std::size_t> rev_entries;  // nnz

  std::size_t nnz() const noexcept { return targets.size(); }
  std::size_t row_begin(std::size_t i) const noexcept { return offsets[i]; }
  std::size_t row_end(std::size_t i) const noexcept { return offsets[i + 1]; }
  std::size_t degree(std::size_t i) const noexcept { return offsets[i + 1] - offsets[i]; }
  /// Row id owning entry k.
  std::vector<std::size_t> entry_rows() const;

  static SparseRows from_lists(std::size_t n_cols, const std::vector<std::vector<std::size_t>>& rows);
};

enum class Backend { Serial, Parallel };

/// Process-wide backend used by the dispatching functions below.
void set_backend(Backend b) noexcept;
Backend backend() noexcept;

namespace serial {
void matmul(const Dense& a, const Dense& b, Dense& out);
void matmul_bt(const Dense& a, const Dense& b, Dense& out);
void matmul_at(const Dense& a, const Dense& b, Dense& out);
void spmm(const SparseRows& adj, std::span<const double> coef, const Dense& h, Dense& out);
void spmm_transpose(const SparseRows& adj, std::span<const double> coef, const Dense& g, Dense& out);
void spmm_coef_grad(const SparseRows& adj, const Dense& g, const Dense& h, std::span<double> out);
}  // namespace serial

namespace omp {
void matmul(const Dense& a, const Dense& b, Dense& out);
void matmul_bt(const Dense& a, const Dense& b, Dense& out);
void matmul_at(const Dense& a, const Dense& b, Dense& out);
void spmm(const SparseRows& adj, std::span<const double> coef, const Dense& h, Dense& out);
void spmm_transpose(const SparseRows& adj, std::span<const double> coef, const Dense& g, Dense& out);
void spmm_coef_grad(const SparseRows& adj, const Dense& g, const Dense& h, std::span<double> out);
}  // namespace omp

// out = a * b
void matmul(const Dense& a, const Dense& b, Dense& out);
// out = a * b^T
void matmul_bt(const Dense& a, const Dense& b, Dense& out);
// out = a^T * b
void matmul_at(const Dense& a, const Dense& b, Dense& out);
// out_i = sum_k coef_k h_{targets_k}
void spmm(const SparseRows& adj, std::span<const double> coef, const Dense& h, Dense& out);
// out_j += sum_{k -> j} coef_k g_{row(k)}   (out must be sized n_cols x width)
void spmm_transpose(const SparseRows& adj, std::span<const double> coef, const Dense& g, Dense& out);
// out_k = g_{row(k)} . h_{targets_k}
void spmm_coef_grad(const SparseRows& adj, const Dense& g, const Dense& h, std::span<double> out);

}  // namespace miarec::kernels
