#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "neuroperf/sparse.hpp"

namespace neuroperf {

// Sparse direct solver. Symmetric matrices go through an LDL^T factorization, anything else
// (or a symmetric matrix whose LDL^T breaks down) through sparse LU. The symbolic analysis
// is kept and reused while the sparsity pattern is unchanged.
class DirectSolver {
 public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  // Throws SingularMatrixError carrying the failing pivot (column) index.
  void factorize(const SparseMatrix& A);
  std::vector<double> solve(std::span<const double> b) const;
  bool used_cholesky() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot direct solve. Postcondition: ||Ax - b|| <= 1e-10 (||A|| ||x|| + ||b||), else
// NumericalError.
std::vector<double> solve_direct(const SparseMatrix& A, std::span<const double> b);

struct CgOptions {
  double tol = 1e-10;            // relative residual ||r|| / ||b||
  std::size_t max_iterations = 0;  // 0 selects 10 * rows
  std::size_t block_size = 1;      // Jacobi block size; dofs per element for dG matrices
};

struct CgResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Preconditioned conjugate gradients with block-Jacobi preconditioning. Reductions run in a
// fixed serial order, so results do not depend on the thread count. Throws ConvergenceError
// on iteration exhaustion or loss of positive definiteness.
CgResult solve_cg(const SparseMatrix& A, std::span<const double> b, const CgOptions& opts = {},
                  std::span<const double> x0 = {});

// 3x3 grid of equally sized square blocks. Missing blocks are zero.
struct BlockSystem {
  std::array<std::array<std::optional<SparseMatrix>, 3>, 3> blocks;
  std::array<std::vector<double>, 3> rhs;
};

std::pair<SparseMatrix, std::vector<double>> compose_block(const BlockSystem& system);

double norm2(std::span<const double> v);

}  // namespace neuroperf
