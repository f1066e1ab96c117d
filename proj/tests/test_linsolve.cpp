#include <cmath>
#include <vector>

#include "doctest.h"
#include "neuroperf/assembly.hpp"
#include "neuroperf/errors.hpp"
#include "neuroperf/linsolve.hpp"
#include "support.hpp"

using namespace neuroperf;
using neuroperf::testing::jittered;
using neuroperf::testing::rect;

namespace {

// Gaussian elimination with partial pivoting on a dense copy.
std::vector<double> dense_lu_solve(const SparseMatrix& A, std::vector<double> b) {
  const std::size_t n = A.rows();
  std::vector<double> a(n * n, 0.0);
  for (const auto& t : A.triplets()) a[t.row * n + t.col] += t.value;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

SparseMatrix diag(std::vector<double> d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return SparseMatrix::from_triplets(d.size(), d.size(), t);
}

}  // namespace

TEST_CASE("direct solve of trivial systems") {
  const std::vector<double> b{1.0, -2.0, 3.5};
  CHECK(solve_direct(SparseMatrix::identity(3), b) == b);
  const auto x = solve_direct(diag({2.0, 4.0}), std::vector<double>{2.0, 8.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("direct solve of an SIPG system agrees with dense elimination") {
  for (int deg = 1; deg <= 3; ++deg) {
    auto s = build_space(neuroperf::testing::two_triangles(), deg);
    const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()),
                                  DirichletData::function({BoundaryTag::Pial}, [](Point2 x) { return x.x - 2 * x.y; }));
    CHECK(rel_diff(solve_direct(op.matrix, op.lift), dense_lu_solve(op.matrix, op.lift)) < 1e-10);
  }
}

TEST_CASE("direct solver handles nonsymmetric matrices") {
  const auto A = SparseMatrix::from_triplets(3, 3, {{0, 0, 4}, {0, 1, 1}, {1, 0, -2}, {1, 1, 3}, {1, 2, 1}, {2, 2, 5}, {2, 0, 1}});
  const std::vector<double> b{1.0, 2.0, 3.0};
  DirectSolver ds;
  ds.factorize(A);
  CHECK_FALSE(ds.used_cholesky());
  CHECK(rel_diff(ds.solve(b), dense_lu_solve(A, b)) < 1e-14);
}

TEST_CASE("singular matrices report the failing pivot") {
  const auto A = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 0.0}});
  try {
    solve_direct(A, std::vector<double>{1.0, 1.0, 1.0});
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.pivot() == 2);
  }
}

TEST_CASE("conjugate gradients") {
  SUBCASE("diagonal system converges in n iterations") {
    CgOptions o;
    o.tol = 1e-12;
    const auto r = solve_cg(diag({1, 2, 3, 4, 5}), std::vector<double>(5, 1.0), o);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.x[i] == doctest::Approx(1.0 / (i + 1)).epsilon(1e-12));
    CHECK(r.iterations <= 5);
  }
  SUBCASE("indefinite matrix raises a convergence error") {
    const auto A = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}});
    CHECK_THROWS_AS(solve_cg(A, std::vector<double>{1.0, -1.0}), ConvergenceError);
  }
  SUBCASE("iteration limit carries the final residual") {
    auto s = build_space(rect(8, 8), 1);
    const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::constant({BoundaryTag::Pial}, 1.0));
    CgOptions o;
    o.max_iterations = 2;
    try {
      solve_cg(op.matrix, op.lift, o);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.iterations() == 2);
      CHECK(e.residual() > 0.0);
    }
  }
}

TEST_CASE("direct and CG agree on SPD systems") {
  for (int deg = 1; deg <= 2; ++deg) {
    auto s = build_space(jittered(6, 0.2, 31), deg);
    const auto op = assemble_sipg(*s, TensorField::constant(Tensor2{1.5, 0.3, 0.8}),
                                  DirichletData::function({BoundaryTag::Pial}, [](Point2 x) { return std::cos(x.x + x.y); }));
    CgOptions o;
    o.tol = 1e-12;
    o.block_size = s->dofs_per_element();
    CHECK(rel_diff(solve_cg(op.matrix, op.lift, o).x, solve_direct(op.matrix, op.lift)) < 1e-8);
  }
}

TEST_CASE("solvers are deterministic") {
  auto s = build_space(jittered(5, 0.2, 8), 2);
  const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::constant({BoundaryTag::Pial}, 2.0));
  CHECK(solve_direct(op.matrix, op.lift) == solve_direct(op.matrix, op.lift));
  CHECK(solve_cg(op.matrix, op.lift).x == solve_cg(op.matrix, op.lift).x);
}

TEST_CASE("block composition") {
  const auto a = diag({1, 2});
  SUBCASE("zero coupling yields a block-diagonal monolith") {
    BlockSystem sys;
    for (int i = 0; i < 3; ++i) {
      sys.blocks[i][i] = a;
      sys.rhs[i] = {1.0, 1.0};
    }
    const auto [M, b] = compose_block(sys);
    CHECK(M.rows() == 6);
    CHECK(b.size() == 6);
    for (const auto& t : M.triplets())
      if (t.value != 0.0) CHECK(t.row / 2 == t.col / 2);
  }
  SUBCASE("mismatched sizes are rejected") {
    BlockSystem sys;
    sys.blocks[0][0] = a;
    sys.blocks[1][1] = diag({1, 2, 3});
    sys.blocks[2][2] = a;
    sys.rhs = {std::vector<double>(2), std::vector<double>(2), std::vector<double>(2)};
    CHECK_THROWS(compose_block(sys));
  }
}

TEST_CASE("pressure monolith with matched boundary data has a constant solution") {
  auto s = build_space(jittered(5, 0.2, 2), 1);
  const double g = 7.0 * 133.322;
  const auto aA = assemble_sipg(*s, TensorField::constant(Tensor2::identity(1e-8)), DirichletData::constant({BoundaryTag::Pial}, g));
  const auto aV = assemble_sipg(*s, TensorField::constant(Tensor2::identity(1e-8)), DirichletData::constant({BoundaryTag::Pial}, g));
  const auto aC = assemble_sipg(*s, TensorField::constant(Tensor2::identity(5e-9)), DirichletData::none());
  const auto mac = assemble_mass(*s, CoefficientField::constant(5e-7));
  const auto mcv = assemble_mass(*s, CoefficientField::constant(4e-7));
  BlockSystem sys;
  sys.blocks[0][0] = linear_combination(1.0, aA.matrix, 1.0, mac);
  sys.blocks[0][1] = linear_combination(-1.0, mac, 0.0, mac);
  sys.blocks[1][0] = sys.blocks[0][1];
  sys.blocks[1][1] = linear_combination(1.0, aC.matrix, 1.0, linear_combination(1.0, mac, 1.0, mcv));
  sys.blocks[1][2] = linear_combination(-1.0, mcv, 0.0, mcv);
  sys.blocks[2][1] = sys.blocks[1][2];
  sys.blocks[2][2] = linear_combination(1.0, aV.matrix, 1.0, mcv);
  sys.rhs = {aA.lift, std::vector<double>(s->num_dofs(), 0.0), aV.lift};
  const auto [M, b] = compose_block(sys);
  CHECK(M.asymmetry() <= 1e-12 * M.max_abs());
  const auto x = solve_direct(M, b);
  const std::size_t n = s->num_dofs();
  for (int k = 0; k < 3; ++k) {
    FieldVector f(s, std::vector<double>(x.begin() + k * n, x.begin() + (k + 1) * n));
    for (std::size_t e = 0; e < s->mesh().num_elements(); ++e) CHECK(f.mean(e) == doctest::Approx(g).epsilon(1e-9));
  }
  CgOptions o;
  o.tol = 1e-12;
  o.block_size = s->dofs_per_element();
  CHECK(rel_diff(solve_cg(M, b, o).x, x) < 1e-8);
}
