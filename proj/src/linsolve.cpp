#include "neuroperf/linsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#ifdef NEUROPERF_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include <cmath>
#include <regex>
#include <string>

#include "neuroperf/errors.hpp"

namespace neuroperf {

namespace {

using EigenCsc = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

EigenCsc to_eigen(const SparseMatrix& A) {
  using RowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
  std::vector<int> rp(A.row_ptr().begin(), A.row_ptr().end());
  std::vector<int> ci(A.col_idx().begin(), A.col_idx().end());
  const Eigen::Map<const RowMajor> m(static_cast<int>(A.rows()), static_cast<int>(A.cols()),
                                     static_cast<int>(A.nnz()), rp.data(), ci.data(), A.values().data());
  EigenCsc c = m;
  c.makeCompressed();
  return c;
}

// SparseLU reports the 1-based position in its column ordering; map it back to a column of A.
std::size_t failing_column(const Eigen::SparseLU<EigenCsc>& lu) {
  std::smatch m;
  static const std::regex num("([0-9]+)");
  const std::string msg = lu.lastErrorMessage();
  if (!std::regex_search(msg, m, num)) return 0;
  const auto k = static_cast<Eigen::Index>(std::stoull(m[1])) - 1;
  const auto& perm = lu.colsPermutation().indices();
  for (Eigen::Index j = 0; j < perm.size(); ++j)
    if (perm[j] == k) return static_cast<std::size_t>(j);
  return static_cast<std::size_t>(k);
}

bool is_symmetric(const SparseMatrix& A) {
  if (A.rows() != A.cols()) return false;
  return A.asymmetry() <= 1e-12 * A.max_abs();
}

}  // namespace

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct DirectSolver::Impl {
#ifdef NEUROPERF_HAVE_CHOLMOD
  Eigen::CholmodSupernodalLLT<EigenCsc> llt;
  bool llt_analyzed = false;
  bool supernodal = false;
#endif
  Eigen::SimplicialLDLT<EigenCsc> ldlt;
  Eigen::SparseLU<EigenCsc> lu;
  bool cholesky = false;
  bool ldlt_analyzed = false;
  bool lu_analyzed = false;
  std::size_t rows = 0;
  std::vector<std::size_t> pattern_rp, pattern_ci;

  bool same_pattern(const SparseMatrix& A) const {
    return A.rows() == rows && A.row_ptr() == pattern_rp && A.col_idx() == pattern_ci;
  }
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

bool DirectSolver::used_cholesky() const { return impl_->cholesky; }

void DirectSolver::factorize(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("DirectSolver: matrix not square");
  Impl& s = *impl_;
  if (!s.same_pattern(A)) {
    s.ldlt_analyzed = s.lu_analyzed = false;
#ifdef NEUROPERF_HAVE_CHOLMOD
    s.llt_analyzed = false;
#endif
    s.rows = A.rows();
    s.pattern_rp = A.row_ptr();
    s.pattern_ci = A.col_idx();
  }
  const EigenCsc m = to_eigen(A);
  if (is_symmetric(A)) {
#ifdef NEUROPERF_HAVE_CHOLMOD
    // Supernodal LL^T for SPD matrices; indefinite ones fall through to LDL^T.
    if (!s.llt_analyzed) {
      s.llt.cholmod().print = 0;
      s.llt.analyzePattern(m);
      s.llt_analyzed = true;
    }
    s.llt.factorize(m);
    if (s.llt.info() == Eigen::Success) {
      s.cholesky = s.supernodal = true;
      return;
    }
    s.supernodal = false;
#endif
    if (!s.ldlt_analyzed) {
      s.ldlt.analyzePattern(m);
      s.ldlt_analyzed = true;
    }
    s.ldlt.factorize(m);
    if (s.ldlt.info() == Eigen::Success) {
      const auto& d = s.ldlt.vectorD();
      const double dmax = d.cwiseAbs().maxCoeff();
      bool tiny = false;
      for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(std::abs(d[i]) > 1e-14 * dmax)) tiny = true;
      if (!tiny) {
        s.cholesky = true;
        return;
      }
    }
  }
  // General path: LU with partial pivoting reports the failing column.
  if (!s.lu_analyzed) {
    s.lu.analyzePattern(m);
    s.lu_analyzed = true;
  }
  s.lu.factorize(m);
  if (s.lu.info() != Eigen::Success) {
    throw SingularMatrixError(failing_column(s.lu), "sparse LU failed: " + s.lu.lastErrorMessage());
  }
  s.cholesky = false;
}

std::vector<double> DirectSolver::solve(std::span<const double> b) const {
  const Impl& s = *impl_;
  if (b.size() != s.rows) throw std::invalid_argument("DirectSolver: right-hand side size mismatch");
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd x;
#ifdef NEUROPERF_HAVE_CHOLMOD
  if (s.cholesky && s.supernodal) {
    x = s.llt.solve(rhs);
  } else
#endif
  if (s.cholesky) {
    x = s.ldlt.solve(rhs);
  } else {
    // SparseLU::solve is logically const but not declared so.
    x = const_cast<Eigen::SparseLU<EigenCsc>&>(s.lu).solve(rhs);
  }
  return {x.data(), x.data() + x.size()};
}

std::vector<double> solve_direct(const SparseMatrix& A, std::span<const double> b) {
  DirectSolver s;
  s.factorize(A);
  std::vector<double> x = s.solve(b);
  std::vector<double> r(A.rows());
  A.multiply(x, r, Execution::Serial);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  // Frobenius norm bounds the 2-norm.
  const double anorm = norm2(A.values());
  const double res = norm2(r);
  const double bound = 1e-10 * (anorm * norm2(x) + norm2(b));
  if (!(res <= bound) && s.used_cholesky()) {
    // LDL^T without pivoting can lose accuracy on indefinite matrices.
    Eigen::SparseLU<EigenCsc> lu;
    const EigenCsc m = to_eigen(A);
    lu.compute(m);
    if (lu.info() != Eigen::Success)
      throw SingularMatrixError(failing_column(lu), "sparse LU failed: " + lu.lastErrorMessage());
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd y = lu.solve(rhs);
    x.assign(y.data(), y.data() + y.size());
    A.multiply(x, r, Execution::Serial);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  }
  if (!std::isfinite(norm2(r)) || norm2(r) > 1e-10 * (anorm * norm2(x) + norm2(b)))
    throw NumericalError("direct solve residual " + std::to_string(norm2(r)) + " exceeds tolerance");
  return x;
}

CgResult solve_cg(const SparseMatrix& A, std::span<const double> b, const CgOptions& opts,
                  std::span<const double> x0) {
  const std::size_t n = A.rows();
  if (A.cols() != n || b.size() != n) throw std::invalid_argument("solve_cg: dimension mismatch");
  const std::size_t bs = opts.block_size == 0 ? 1 : opts.block_size;
  if (n % bs != 0) throw std::invalid_argument("solve_cg: block size does not divide dimension");
  const std::size_t maxit = opts.max_iterations ? opts.max_iterations : 10 * n;

  // Inverted diagonal blocks.
  const std::size_t nblocks = n / bs;
  std::vector<Eigen::MatrixXd> inv(nblocks);
  for (std::size_t k = 0; k < nblocks; ++k) {
    Eigen::MatrixXd blk(bs, bs);
    for (std::size_t i = 0; i < bs; ++i)
      for (std::size_t j = 0; j < bs; ++j) blk(i, j) = A.at(k * bs + i, k * bs + j);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(blk);
    inv[k] = lu.isInvertible() ? Eigen::MatrixXd(lu.inverse()) : Eigen::MatrixXd::Identity(bs, bs);
  }
  auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
    for (std::size_t k = 0; k < nblocks; ++k)
      for (std::size_t i = 0; i < bs; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < bs; ++j) s += inv[k](i, j) * r[k * bs + j];
        z[k * bs + i] = s;
      }
  };
  auto dotp = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
    return s;
  };

  CgResult res;
  res.x.assign(n, 0.0);
  if (!x0.empty()) {
    if (x0.size() != n) throw std::invalid_argument("solve_cg: initial guess size mismatch");
    res.x.assign(x0.begin(), x0.end());
  }
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.x.assign(n, 0.0);
    return res;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  A.multiply(res.x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  res.residual = norm2(r) / bnorm;
  if (res.residual <= opts.tol) return res;
  precond(r, z);
  p = z;
  double rz = dotp(r, z);
  for (std::size_t it = 1; it <= maxit; ++it) {
    A.multiply(p, ap);
    const double pap = dotp(p, ap);
    if (!(pap > 0.0)) throw ConvergenceError(it, res.residual, "CG: matrix not positive definite");
    const double a = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += a * p[i];
      r[i] -= a * ap[i];
    }
    res.iterations = it;
    res.residual = norm2(r) / bnorm;
    if (res.residual <= opts.tol) return res;
    precond(r, z);
    const double rz_new = dotp(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError(res.iterations, res.residual, "CG did not converge");
}

std::pair<SparseMatrix, std::vector<double>> compose_block(const BlockSystem& system) {
  std::size_t n = 0;
  for (const auto& row : system.blocks)
    for (const auto& b : row)
      if (b) {
        if (b->rows() != b->cols()) throw std::invalid_argument("compose_block: blocks must be square");
        if (n == 0) n = b->rows();
        if (b->rows() != n) throw std::invalid_argument("compose_block: block sizes differ");
      }
  for (const auto& r : system.rhs)
    if (!r.empty()) {
      if (n == 0) n = r.size();
      if (r.size() != n) throw std::invalid_argument("compose_block: right-hand side size differs");
    }
  if (n == 0) throw std::invalid_argument("compose_block: empty system");

  // Row-wise concatenation: block column offsets keep the column indices sorted.
  std::vector<std::size_t> rp(3 * n + 1, 0), ci;
  std::vector<double> v;
  std::size_t total = 0;
  for (const auto& row : system.blocks)
    for (const auto& b : row)
      if (b) total += b->nnz();
  ci.reserve(total + 3 * n);
  v.reserve(total + 3 * n);
  for (std::size_t bi = 0; bi < 3; ++bi)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t start = ci.size();
      for (std::size_t bj = 0; bj < 3; ++bj) {
        const auto& b = system.blocks[bi][bj];
        if (!b) continue;
        for (std::size_t k = b->row_ptr()[i]; k < b->row_ptr()[i + 1]; ++k) {
          ci.push_back(bj * n + b->col_idx()[k]);
          v.push_back(b->values()[k]);
        }
      }
      if (ci.size() == start) {
        ci.push_back(bi * n + i);
        v.push_back(0.0);
      }
      rp[bi * n + i + 1] = ci.size();
    }
  std::vector<double> rhs(3 * n, 0.0);
  for (std::size_t bi = 0; bi < 3; ++bi)
    for (std::size_t i = 0; i < system.rhs[bi].size(); ++i) rhs[bi * n + i] = system.rhs[bi][i];
  return {SparseMatrix(3 * n, 3 * n, std::move(rp), std::move(ci), std::move(v)), std::move(rhs)};
}

}  // namespace neuroperf
