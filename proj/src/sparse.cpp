#include "neuroperf/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace neuroperf {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
      col_idx_.size() != values_.size())
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_ptr_[i + 1] <= row_ptr_[i]) throw std::invalid_argument("SparseMatrix: empty row");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= cols_) throw std::invalid_argument("SparseMatrix: column out of range");
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
        throw std::invalid_argument("SparseMatrix: columns not strictly increasing");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
  for (const auto& x : t)
    if (x.row >= rows || x.col >= cols) throw std::invalid_argument("from_triplets: index out of range");
  std::vector<bool> has(rows, false);
  for (const auto& x : t) has[x.row] = true;
  for (std::size_t i = 0; i < rows; ++i)
    if (!has[i] && cols > 0) t.push_back({i, std::min(i, cols - 1), 0.0});
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> rp(rows + 1, 0), ci;
  std::vector<double> v;
  ci.reserve(t.size());
  v.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0 && t[k].row == t[k - 1].row && t[k].col == t[k - 1].col) {
      v.back() += t[k].value;
      continue;
    }
    ci.push_back(t[k].col);
    v.push_back(t[k].value);
    ++rp[t[k].row + 1];
  }
  for (std::size_t i = 0; i < rows; ++i) rp[i + 1] += rp[i];
  return SparseMatrix(rows, cols, std::move(rp), std::move(ci), std::move(v));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> rp(n + 1), ci(n);
  for (std::size_t i = 0; i <= n; ++i) rp[i] = i;
  for (std::size_t i = 0; i < n; ++i) ci[i] = i;
  return SparseMatrix(n, n, std::move(rp), std::move(ci), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto b = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto e = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y, Execution exec) const {
  if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("multiply: size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(rows_);
  auto row = [&](std::ptrdiff_t i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  };
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) row(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) row(i);
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({col_idx_[k], i, values_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::asymmetry() const {
  if (rows_ != cols_) throw std::invalid_argument("asymmetry: matrix not square");
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      m = std::max(m, std::abs(values_[k] - at(col_idx_[k], i)));
  return m;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({i, col_idx_[k], values_[k]});
  return t;
}

SparseMatrix linear_combination(double a, const SparseMatrix& A, double b, const SparseMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("linear_combination: dimension mismatch");
  const std::size_t n = A.rows();
  std::vector<std::size_t> rp(n + 1, 0), ci;
  std::vector<double> v;
  ci.reserve(A.nnz() + B.nnz());
  v.reserve(A.nnz() + B.nnz());
  const auto& ar = A.row_ptr();
  const auto& br = B.row_ptr();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p = ar[i], q = br[i];
    while (p < ar[i + 1] || q < br[i + 1]) {
      const std::size_t ca = p < ar[i + 1] ? A.col_idx()[p] : SIZE_MAX;
      const std::size_t cb = q < br[i + 1] ? B.col_idx()[q] : SIZE_MAX;
      if (ca == cb) {
        ci.push_back(ca);
        v.push_back(a * A.values()[p++] + b * B.values()[q++]);
      } else if (ca < cb) {
        ci.push_back(ca);
        v.push_back(a * A.values()[p++]);
      } else {
        ci.push_back(cb);
        v.push_back(b * B.values()[q++]);
      }
    }
    rp[i + 1] = ci.size();
  }
  return SparseMatrix(n, A.cols(), std::move(rp), std::move(ci), std::move(v));
}

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values()[k]);
      out << i + 1 << ' ' << m.col_idx()[k] + 1 << ' ' << buf << '\n';
    }
  }
}

void save_matrix_market(const SparseMatrix& m, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_matrix_market(m, f);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace neuroperf
