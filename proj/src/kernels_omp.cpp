#include <cstdint>

#include "miarec/kernels.hpp"

namespace miarec::kernels::omp {

// Loops index with signed integers for OpenMP; each output element is owned by
// exactly one iteration and accumulated in the same order as the serial code.

void matmul(const Dense& a, const Dense& b, Dense& out) {
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) o[j] = 0.0;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      const double* brow = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += aik * brow[j];
    }
  }
}

void matmul_bt(const Dense& a, const Dense& b, Dense& out) {
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols(), m = b.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * inner;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.data() + j * inner;
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
}

void matmul_at(const Dense& a, const Dense& b, Dense& out) {
  const std::size_t n = a.rows(), m = b.cols();
  const auto p = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < p; ++i) {
    double* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) o[j] = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double ari = a(r, i);
      const double* brow = b.data() + r * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += ari * brow[j];
    }
  }
}

void spmm(const SparseRows& adj, std::span<const double> coef, const Dense& h, Dense& out) {
  const std::size_t w = h.cols();
  const auto n = static_cast<std::int64_t>(adj.n_rows);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    double* o = out.data() + i * w;
    for (std::size_t c = 0; c < w; ++c) o[c] = 0.0;
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
      const double* src = h.data() + adj.targets[k] * w;
      for (std::size_t c = 0; c < w; ++c) o[c] += coef[k] * src[c];
    }
  }
}

void spmm_transpose(const SparseRows& adj, std::span<const double> coef, const Dense& g,
                    Dense& out) {
  // Gather through the reverse index so no two threads write the same row.
  const std::size_t w = g.cols();
  const auto rows = adj.entry_rows();
  const auto n = static_cast<std::int64_t>(adj.n_cols);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t j = 0; j < n; ++j) {
    double* o = out.data() + j * w;
    for (std::size_t r = adj.rev_offsets[j]; r < adj.rev_offsets[j + 1]; ++r) {
      const std::size_t k = adj.rev_entries[r];
      const double* gi = g.data() + rows[k] * w;
      for (std::size_t c = 0; c < w; ++c) o[c] += coef[k] * gi[c];
    }
  }
}

void spmm_coef_grad(const SparseRows& adj, const Dense& g, const Dense& h, std::span<double> out) {
  const std::size_t w = g.cols();
  const auto n = static_cast<std::int64_t>(adj.n_rows);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* gi = g.data() + i * w;
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
      const double* hj = h.data() + adj.targets[k] * w;
      double s = 0.0;
      for (std::size_t c = 0; c < w; ++c) s += gi[c] * hj[c];
      out[k] = s;
    }
  }
}

}  // namespace miarec::kernels::omp
