#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "neuroperf/parallel.hpp"

namespace neuroperf {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix. Column indices are strictly increasing within a row and
// every row stores at least one entry.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values);

  // Duplicates are summed. Rows without triplets receive an explicit zero diagonal entry
  // (square matrices) or first-column entry, so no row is empty.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Zero when (i, j) is not stored.
  double at(std::size_t i, std::size_t j) const;

  void multiply(std::span<const double> x, std::span<double> y,
                Execution exec = Execution::Parallel) const;
  std::vector<double> operator*(std::span<const double> x) const;

  SparseMatrix transpose() const;
  double max_abs() const;
  // max |A_ij - A_ji|
  double asymmetry() const;
  std::vector<Triplet> triplets() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// a*A + b*B on the union of both patterns.
SparseMatrix linear_combination(double a, const SparseMatrix& A, double b, const SparseMatrix& B);

// MatrixMarket coordinate real general, 1-based indices.
void write_matrix_market(const SparseMatrix& m, std::ostream& out);
void save_matrix_market(const SparseMatrix& m, const std::filesystem::path& path);

}  // namespace neuroperf
