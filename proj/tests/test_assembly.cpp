#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "neuroperf/assembly.hpp"
#include "neuroperf/linsolve.hpp"
#include "neuroperf/model.hpp"
#include "support.hpp"

using namespace neuroperf;
using neuroperf::testing::jittered;
using neuroperf::testing::rect;

namespace {

double quad_form(const SparseMatrix& A, const std::vector<double>& x) {
  const auto y = A * x;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

Eigen::MatrixXd dense(const SparseMatrix& A) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (const auto& t : A.triplets()) d(t.row, t.col) += t.value;
  return d;
}

bool bitwise_equal(const SparseMatrix& a, const SparseMatrix& b) {
  return a.row_ptr() == b.row_ptr() && a.col_idx() == b.col_idx() && a.values() == b.values();
}

const Tensor2 kAniso{2.0, 0.7, 1.1};

}  // namespace

TEST_CASE("unit mass matrix measures the domain area") {
  auto s = build_space(rect(10, 20, 0.1, 0.4), 1);
  const auto M = assemble_mass(*s);
  const auto one = l2_project(s, [](Point2) { return 1.0; });
  CHECK(quad_form(M, one.coeffs()) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("unit mass matrix of the orthonormal basis is diagonal with element scaling") {
  auto s = build_space(jittered(3, 0.2, 5), 2);
  const auto M = assemble_mass(*s);
  const std::size_t nb = s->dofs_per_element();
  for (std::size_t i = 0; i < M.rows(); ++i) {
    const double det = s->element_map(i / nb).det;
    for (std::size_t k = M.row_ptr()[i]; k < M.row_ptr()[i + 1]; ++k) {
      const std::size_t j = M.col_idx()[k];
      CHECK(std::abs(M.values()[k] - (i == j ? det : 0.0)) < 1e-14 * det + 1e-16);
    }
  }
}

TEST_CASE("state-weighted mass at a constant state is a scalar multiple of the mass") {
  PhysicalParams p;
  auto s = build_space(rect(4, 4), 1);
  const auto M = assemble_mass(*s);
  for (double c : {0.0, 0.3, 2.0}) {
    auto ut = std::make_shared<const FieldVector>(l2_project(s, [c](Point2) { return c; }));
    const auto W = assemble_mass(*s, CoefficientField::state([&](Point2, double v) { return transfer_AC(v, p); }, ut));
    const double scale = transfer_AC(c, p);
    const auto diff = linear_combination(1.0, W, -scale, M);
    CHECK(diff.max_abs() <= 1e-12 * scale * M.max_abs());
  }
}

TEST_CASE("SIPG operators are symmetric") {
  for (int deg = 1; deg <= 3; ++deg) {
    for (unsigned seed : {1u, 2u}) {
      auto s = build_space(jittered(4, 0.3, seed), deg);
      const auto op = assemble_sipg(*s, TensorField::constant(kAniso), DirichletData::constant({BoundaryTag::Pial}, 3.0));
      CHECK(op.matrix.asymmetry() <= 1e-12 * op.matrix.max_abs());
      const auto opn = assemble_sipg(
          *s, TensorField::analytic([](Point2 x) { return Tensor2{1.0 + x.x, 0.2 * x.y, 2.0 - x.y}; }),
          DirichletData::none());
      CHECK(opn.matrix.asymmetry() <= 1e-12 * opn.matrix.max_abs());
    }
  }
}

TEST_CASE("constants lie in the kernel of the pure Neumann operator") {
  for (int deg = 1; deg <= 3; ++deg) {
    auto s = build_space(jittered(5, 0.2, 9), deg);
    const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::none());
    const auto c = l2_project(s, [](Point2) { return 1.0; });
    const auto y = op.matrix * c.coeffs();
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    CHECK(m < 1e-11 * op.matrix.max_abs());
    for (double v : op.lift) CHECK(v == 0.0);
  }
}

TEST_CASE("Neumann operator is coercive off the constants on two triangles") {
  for (int deg = 1; deg <= 3; ++deg) {
    auto s = build_space(neuroperf::testing::two_triangles(), deg);
    const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::none());
    const Eigen::MatrixXd A = dense(op.matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const auto ev = es.eigenvalues();
    CHECK(std::abs(ev(0)) < 1e-10 * ev(ev.size() - 1));
    CHECK(ev(1) > 1e-8 * ev(ev.size() - 1));
  }
}

TEST_CASE("Dirichlet operator is positive definite") {
  auto s = build_space(jittered(3, 0.2, 4), 2);
  const auto op = assemble_sipg(*s, TensorField::constant(kAniso), DirichletData::constant({BoundaryTag::Pial}, 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(op.matrix));
  CHECK(es.eigenvalues()(0) > 0.0);
  for (double v : op.lift) CHECK(v == 0.0);
}

TEST_CASE("constant Dirichlet data is reproduced exactly") {
  for (int deg = 1; deg <= 3; ++deg) {
    auto s = build_space(jittered(4, 0.25, 21), deg);
    const double c = 4.5;
    const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()),
                                  DirichletData::constant({BoundaryTag::Pial}, c));
    const auto x = solve_direct(op.matrix, op.lift);
    FieldVector f(s, x);
    for (std::size_t e = 0; e < s->mesh().num_elements(); ++e) {
      const auto qv = eval_at_quadrature(f, e);
      for (double v : qv.values) CHECK(std::abs(v - c) < 1e-10);
    }
  }
}

TEST_CASE("nonpositive penalty is rejected") {
  auto s = build_space(rect(1, 1), 1);
  CHECK_THROWS_AS(assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::none(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::none(), -1.0),
                  std::invalid_argument);
}

TEST_CASE("load vector of a constant pairs with constants to the area") {
  auto s = build_space(rect(6, 12, 0.1, 0.4), 2);
  const auto one = l2_project(s, [](Point2) { return 1.0; });
  const auto b = assemble_load(*s, CoefficientField::constant(1.0));
  double pair = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) pair += b[i] * one.coeffs()[i];
  CHECK(pair == doctest::Approx(0.04).epsilon(1e-12));
  for (double v : assemble_load(*s, CoefficientField::constant(0.0))) CHECK(v == 0.0);
}

TEST_CASE("production load at zero hypoperfusion equals k0 times the unit load") {
  PhysicalParams p;
  auto s = build_space(rect(3, 3), 1);
  const auto base = assemble_load(*s, CoefficientField::constant(1.0));
  const auto b = assemble_load(*s, CoefficientField::analytic([&](Point2) { return modulated_rates(2.0, 2.0, p).k0B; }));
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == doctest::Approx(p.k0 * base[i]).epsilon(1e-15));
}

TEST_CASE("serial and parallel assembly are bitwise identical") {
  const int saved = max_threads();
  set_max_threads(4);
  auto s = build_space(jittered(8, 0.2, 13), 2);
  auto ut = std::make_shared<const FieldVector>(l2_project(s, [](Point2 x) { return std::sin(5 * x.x) * x.y; }));
  PhysicalParams p;
  const auto kc = CoefficientField::state([&](Point2, double v) { return capillary_permeability(v, p); }, ut);
  const auto dir = DirichletData::function({BoundaryTag::Pial}, [](Point2 x) { return x.x * x.x - x.y; });
  const auto a1 = assemble_sipg(*s, TensorField::isotropic(kc), dir, kDefaultPenalty, Execution::Serial);
  const auto a2 = assemble_sipg(*s, TensorField::isotropic(kc), dir, kDefaultPenalty, Execution::Parallel);
  CHECK(bitwise_equal(a1.matrix, a2.matrix));
  CHECK(a1.lift == a2.lift);
  CHECK(bitwise_equal(assemble_mass(*s, kc, Execution::Serial), assemble_mass(*s, kc, Execution::Parallel)));
  CHECK(assemble_load(*s, kc, Execution::Serial) == assemble_load(*s, kc, Execution::Parallel));

  std::vector<double> y1(a1.matrix.rows()), y2(a1.matrix.rows());
  a1.matrix.multiply(ut->coeffs(), y1, Execution::Serial);
  a1.matrix.multiply(ut->coeffs(), y2, Execution::Parallel);
  CHECK(y1 == y2);
  set_max_threads(saved);
}

TEST_CASE("face-coupled operators share the element stencil pattern") {
  auto mesh = jittered(4, 0.2, 17);
  auto s = build_space(mesh, 1);
  const auto st = element_stencils(*mesh);
  const auto op = assemble_sipg(*s, TensorField::constant(Tensor2::identity()), DirichletData::none());
  const std::size_t nb = s->dofs_per_element();
  for (std::size_t e = 0; e < mesh->num_elements(); ++e) {
    CHECK(std::is_sorted(st[e].begin(), st[e].end()));
    CHECK(std::find(st[e].begin(), st[e].end(), e) != st[e].end());
    const std::size_t row = e * nb;
    CHECK(op.matrix.row_ptr()[row + 1] - op.matrix.row_ptr()[row] == st[e].size() * nb);
  }
}

TEST_CASE("sparse matrices dump in MatrixMarket coordinate format") {
  const auto m = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 0, -1.0}, {0, 0, 0.5}});
  std::ostringstream os;
  write_matrix_market(m, os);
  const std::string s = os.str();
  CHECK(s.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  CHECK(s.find("1 1 2.5") != std::string::npos);
  CHECK(s.find("2 1 -1") != std::string::npos);
  CHECK(m.at(1, 1) == 0.0);
  CHECK(m.row_ptr()[2] - m.row_ptr()[1] >= 1);
}

TEST_CASE("linear combination merges sparsity patterns") {
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  const auto b = SparseMatrix::from_triplets(2, 2, {{0, 1, 3.0}, {1, 1, 2.0}});
  const auto c = linear_combination(2.0, a, -1.0, b);
  CHECK(c.at(0, 0) == 2.0);
  CHECK(c.at(0, 1) == -3.0);
  CHECK(c.at(1, 1) == 0.0);
  CHECK(c.nnz() == 3);
}
