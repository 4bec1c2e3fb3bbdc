#include "miarec/kernels.hpp"

#include <atomic>

namespace miarec::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::Parallel};
}

void set_backend(Backend b) noexcept { g_backend.store(b); }
Backend backend() noexcept { return g_backend.load(); }

std::vector<std::size_t> SparseRows::entry_rows() const {
  std::vector<std::size_t> rows(nnz());
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) rows[k] = i;
  return rows;
}

SparseRows SparseRows::from_lists(std::size_t n_cols,
                                  const std::vector<std::vector<std::size_t>>& rows) {
  SparseRows s;
  s.n_rows = rows.size();
  s.n_cols = n_cols;
  s.offsets.assign(1, 0);
  for (const auto& r : rows) {
    s.targets.insert(s.targets.end(), r.begin(), r.end());
    s.offsets.push_back(s.targets.size());
  }
  s.rev_offsets.assign(n_cols + 1, 0);
  for (std::size_t t : s.targets) ++s.rev_offsets[t + 1];
  for (std::size_t j = 0; j < n_cols; ++j) s.rev_offsets[j + 1] += s.rev_offsets[j];
  s.rev_entries.resize(s.nnz());
  std::vector<std::size_t> cursor(s.rev_offsets.begin(), s.rev_offsets.end() - 1);
  for (std::size_t k = 0; k < s.nnz(); ++k) s.rev_entries[cursor[s.targets[k]]++] = k;
  return s;
}

namespace serial {

void matmul(const Dense& a, const Dense& b, Dense& out) {
  const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
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
  const std::size_t n = a.rows(), inner = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
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
  const std::size_t n = a.rows(), p = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < p; ++i) {
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
  for (std::size_t i = 0; i < adj.n_rows; ++i) {
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
  const std::size_t w = g.cols();
  for (std::size_t i = 0; i < adj.n_rows; ++i) {
    const double* gi = g.data() + i * w;
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
      double* o = out.data() + adj.targets[k] * w;
      for (std::size_t c = 0; c < w; ++c) o[c] += coef[k] * gi[c];
    }
  }
}

void spmm_coef_grad(const SparseRows& adj, const Dense& g, const Dense& h, std::span<double> out) {
  const std::size_t w = g.cols();
  for (std::size_t i = 0; i < adj.n_rows; ++i) {
    const double* gi = g.data() + i * w;
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
      const double* hj = h.data() + adj.targets[k] * w;
      double s = 0.0;
      for (std::size_t c = 0; c < w; ++c) s += gi[c] * hj[c];
      out[k] = s;
    }
  }
}

}  // namespace serial

void matmul(const Dense& a, const Dense& b, Dense& out) {
  backend() == Backend::Serial ? serial::matmul(a, b, out) : omp::matmul(a, b, out);
}
void matmul_bt(const Dense& a, const Dense& b, Dense& out) {
  backend() == Backend::Serial ? serial::matmul_bt(a, b, out) : omp::matmul_bt(a, b, out);
}
void matmul_at(const Dense& a, const Dense& b, Dense& out) {
  backend() == Backend::Serial ? serial::matmul_at(a, b, out) : omp::matmul_at(a, b, out);
}
void spmm(const SparseRows& adj, std::span<const double> coef, const Dense& h, Dense& out) {
  backend() == Backend::Serial ? serial::spmm(adj, coef, h, out) : omp::spmm(adj, coef, h, out);
}
void spmm_transpose(const SparseRows& adj, std::span<const double> coef, const Dense& g,
                    Dense& out) {
  backend() == Backend::Serial ? serial::spmm_transpose(adj, coef, g, out)
                               : omp::spmm_transpose(adj, coef, g, out);
}
void spmm_coef_grad(const SparseRows& adj, const Dense& g, const Dense& h, std::span<double> out) {
  backend() == Backend::Serial ? serial::spmm_coef_grad(adj, g, h, out)
                               : omp::spmm_coef_grad(adj, g, h, out);
}

}  // namespace miarec::kernels
