#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "neuroperf/verify.hpp"

using namespace neuroperf;

TEST_CASE("SIPG Poisson convergence orders") {
  const auto rows = poisson_convergence_study({1, 2}, 3, 8);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CAPTURE(r.degree);
    CAPTURE(r.n);
    if (r.n == 8) {
      CHECK(std::isnan(r.order));
      continue;
    }
    CHECK(r.order == doctest::Approx(r.degree + 1.0).epsilon(0.2 / (r.degree + 1.0)));
  }
  CHECK_THROWS_AS(poisson_convergence_study({4}, 2), std::invalid_argument);
}

TEST_CASE("SIPG reproduces polynomials of the space degree") {
  // -Laplace(x^2 + y) = -2
  const auto exact = [](Point2 x) { return x.x * x.x + x.y; };
  const auto f = [](Point2) { return -2.0; };
  CHECK(poisson_l2_error(2, 4, exact, f) < 1e-11);
  CHECK(poisson_l2_error(3, 3, exact, f) < 1e-11);
  CHECK(poisson_l2_error(1, 4, [](Point2 x) { return 1.0 + 2 * x.x - x.y; }, [](Point2) { return 0.0; }) < 1e-12);
}

TEST_CASE("serial and parallel Poisson errors agree") {
  const auto u = [](Point2 x) { return std::sin(std::numbers::pi * x.x) * std::cos(x.y); };
  const auto f = [](Point2 x) {
    return (std::numbers::pi * std::numbers::pi + 1.0) * std::sin(std::numbers::pi * x.x) * std::cos(x.y);
  };
  CHECK(poisson_l2_error(2, 6, u, f, Execution::Serial) == poisson_l2_error(2, 6, u, f, Execution::Parallel));
}

TEST_CASE("ODE oracle long-time limits") {
  SUBCASE("R0 = 2 approaches the pathogenic state") {
    const KineticRates k{1.0, 1.0, 1.0, 2.0};
    const auto t = ode_oracle(k, 1.0, 0.1, 60.0, 1e-3, 60.0);
    CHECK(t.u.back() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(t.ut.back() == doctest::Approx(0.5).epsilon(1e-6));
    const auto e = homogeneous_equilibria(k);
    CHECK(t.ut.back() == doctest::Approx(e.ut_pathogenic).epsilon(1e-6));
  }
  SUBCASE("R0 < 1 returns to the healthy state") {
    const KineticRates k{1.0, 1.0, 1.5, 1.0};
    const auto t = ode_oracle(k, 1.0, 0.6, 60.0, 1e-3, 60.0);
    CHECK(t.u.back() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(t.ut.back()) < 1e-9);
  }
  SUBCASE("zero misfolded protein stays zero") {
    const auto t = ode_oracle({1.0, 1.0, 0.5, 2.0}, 0.3, 0.0, 5.0, 1e-3, 1.0);
    for (double v : t.ut) CHECK(v == 0.0);
    CHECK(t.u.back() == doctest::Approx(1.0 - 0.7 * std::exp(-5.0)).epsilon(1e-10));
  }
}

TEST_CASE("ODE oracle converges at fourth order") {
  const KineticRates k{1.0, 1.0, 0.8, 1.5};
  const auto ref = ode_oracle(k, 0.9, 0.3, 2.0, 1e-4, 0.5);
  const double e1 = max_trajectory_error(ode_oracle(k, 0.9, 0.3, 2.0, 0.1, 0.5), ref);
  const double e2 = max_trajectory_error(ode_oracle(k, 0.9, 0.3, 2.0, 0.05, 0.5), ref);
  CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("implicit Euler on the 0D reduction is first order") {
  const KineticRates k{1.0, 1.0, 0.8, 1.5};
  const double T = 2.0;
  double prev = 0.0;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) {
    const auto ref = ode_oracle(k, 0.9, 0.3, T, 1e-4, dt);
    const double e = max_trajectory_error(implicit_euler_0d(k, 0.9, 0.3, T, dt), ref);
    if (prev > 0.0) CHECK(std::log2(prev / e) == doctest::Approx(1.0).epsilon(0.15));
    prev = e;
  }
}

TEST_CASE("trajectory comparison requires matching samples") {
  const KineticRates k{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(max_trajectory_error(implicit_euler_0d(k, 1, 0, 1, 0.1), implicit_euler_0d(k, 1, 0, 1, 0.2)),
                  std::invalid_argument);
}

TEST_CASE("lumped hypoperfusion") {
  const PhysicalParams p;
  CHECK(lumped_hypoperfusion(0.0, p) == 0.0);
  const double g0 = p.beta_AC * p.beta_CV / (p.beta_AC + p.beta_CV);
  const double ba = p.beta_AC_ab, bc = p.beta_CV_ab;
  CHECK(lumped_hypoperfusion(1e3, p) == doctest::Approx(1.0 - ba * bc / (ba + bc) / g0).epsilon(1e-6));
  double last = 0.0;
  for (double ut = 0.1; ut < 3.0; ut += 0.1) {
    const double r = lumped_hypoperfusion(ut, p);
    CHECK(r > last);
    last = r;
  }
}

TEST_CASE("coupled 0D surrogate") {
  const PhysicalParams p;
  SUBCASE("no misfolded protein stays healthy") {
    const auto res = coupled_0d_oracle(p, 1.0, 0.0, 50.0);
    CHECK(res.classification == Classification::Extinction);
    CHECK(res.r_max == 0.0);
  }
  SUBCASE("a large seed breaks out") {
    const auto res = coupled_0d_oracle(p, 1.0, 0.6, 100.0);
    CHECK(res.classification == Classification::Outbreak);
    CHECK(res.trajectory.ut.back() == doctest::Approx(res.ut_pathogenic).epsilon(1e-3));
  }
  SUBCASE("without feedback every seed dies out") {
    for (double a : {0.05, 0.3, 0.6, 1.5}) CHECK(coupled_0d_oracle(p, 1.0, a, 100.0, 1e-3, false).classification ==
                                                 Classification::Extinction);
  }
}

TEST_CASE("separatrix bracket and monotone seed response") {
  const PhysicalParams p;
  const auto b = separatrix_bracket(p, 1.0, 0.0, 1.0, 100.0, 1e-3, 1e-2);
  CHECK(b.outbreak > b.extinct);
  CHECK(b.outbreak - b.extinct <= 1e-3);
  bool broke = false;
  for (int i = 1; i <= 20; ++i) {
    const double a = 0.05 * i;
    const bool out = coupled_0d_oracle(p, 1.0, a, 100.0, 1e-2, true, 100.0).classification == Classification::Outbreak;
    if (broke) CHECK(out);
    broke = broke || out;
    CHECK(out == (a > b.extinct));
  }
  CHECK_THROWS_AS(separatrix_bracket(p, 1.0, 0.9, 1.0, 100.0), std::invalid_argument);
}

TEST_CASE("transcritical scan switches limits at R0 = 1") {
  const KineticRates base{1.0, 1.0, 1.5, 1.0};
  const double star = base.k1 * base.k1_tilde / base.k0;
  std::vector<double> k12s;
  for (double f : {0.5, 0.8, 0.95, 1.05, 1.2, 2.0}) k12s.push_back(f * star);
  const auto rows = bifurcation_scan(base, k12s, 1.0, 0.2, 400.0);
  for (const auto& r : rows) {
    CAPTURE(r.k12);
    CHECK((r.R0 > 1.0) == (r.k12 > star));
    CHECK((r.ut_pathogenic > 0.0) == (r.R0 > 1.0));
    CHECK(r.pathogenic_limit == (r.R0 > 1.0));
    if (r.pathogenic_limit) CHECK(r.ut_long_time == doctest::Approx(r.ut_pathogenic).epsilon(1e-3));
  }
}
