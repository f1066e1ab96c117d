#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "neuroperf/errors.hpp"
#include "neuroperf/model.hpp"

using namespace neuroperf;

TEST_CASE("default parameters are the idealized rectangle set and validate") {
  const PhysicalParams p;
  CHECK(p == PhysicalParams::idealized());
  CHECK_NOTHROW(p.validate());
  CHECK_NOTHROW(PhysicalParams::brainlike().validate());
}

TEST_CASE("parameter validation names the offending key") {
  PhysicalParams p;
  p.p_veins = p.p_arteries;
  try {
    p.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "perfusion.p_arteries");
  }
  p = {};
  p.k_C_ab = 2 * p.k_C;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.k12 = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("capillary permeability follows the saturating constriction law") {
  const PhysicalParams p;
  CHECK(capillary_permeability(0.0, p) == 5e-3);
  CHECK(capillary_permeability(0.6, p) == doctest::Approx(9.151e-4).epsilon(1e-4));
  CHECK(capillary_permeability(4.0, p) == doctest::Approx(p.k_C_ab).epsilon(1e-6));
  CHECK(capillary_permeability(-0.3, p) == p.k_C);
}

TEST_CASE("transfer coefficients follow the same law") {
  const PhysicalParams p;
  CHECK(transfer_AC(0.0, p) == 5e-7);
  CHECK(transfer_AC(0.6, p) == doctest::Approx(4.166e-7).epsilon(1e-4));
  CHECK(transfer_CV(0.0, p) == 4e-7);
}

TEST_CASE("constriction laws are monotone and bounded") {
  const PhysicalParams p;
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    double a = d(rng), b = d(rng);
    if (a > b) std::swap(a, b);
    const std::array<std::array<double, 3>, 3> laws{{{p.k_C, p.k_C_ab, p.alpha_kC},
                                                     {p.beta_AC, p.beta_AC_ab, p.alpha_beta_AC},
                                                     {p.beta_CV, p.beta_CV_ab, p.alpha_beta_CV}}};
    for (const auto& [base, floor, alpha] : laws) {
      const double fa = transfer_coefficient(a, base, floor, alpha);
      const double fb = transfer_coefficient(b, base, floor, alpha);
      CHECK(fb <= fa);
      CHECK(fb >= floor);
      CHECK(fa <= base);
    }
  }
}

TEST_CASE("CBF rate is linear in the transfer coefficient and the pressure gap") {
  CHECK(cbf_rate(5.0, 5.0, 5e-7, 1000.0) == 0.0);
  CHECK(cbf_rate(4000.0, 0.0, 5e-7, 1000.0) == doctest::Approx(2e-6).epsilon(1e-14));
  CHECK(cbf_rate(4000.0, 0.0, 1e-6, 1000.0) == doctest::Approx(2 * cbf_rate(4000.0, 0.0, 5e-7, 1000.0)));
  CHECK(cbf_rate(0.0, 10.0, 5e-7, 1000.0) < 0.0);
}

TEST_CASE("hypoperfusion modulates the kinetic rates") {
  const PhysicalParams p;
  SUBCASE("no hypoperfusion returns base rates exactly") {
    const auto m = modulated_rates(3.7e-6, 3.7e-6, p);
    CHECK(m.k0B == p.k0);
    CHECK(m.k1B == p.k1);
    CHECK(m.k1B_tilde == p.k1_tilde);
    CHECK(m.r == 0.0);
  }
  SUBCASE("twenty percent reduction") {
    const auto m = modulated_rates(0.8, 1.0, p);
    CHECK(m.k0B == doctest::Approx(1.25));
    CHECK(m.k1B == doctest::Approx(0.75));
    CHECK(m.k1B_tilde == doctest::Approx(0.75));
  }
  SUBCASE("total stagnation clamps the clearance at the floor") {
    const auto m = modulated_rates(0.0, 1.0, p);
    CHECK(m.r == 1.0);
    CHECK(m.k1B_tilde == p.rate_floor);
    CHECK(m.k1B == p.rate_floor);
  }
  SUBCASE("hyperperfusion is clamped to zero reduction") {
    CHECK(modulated_rates(2.0, 1.0, p).r == 0.0);
  }
  CHECK_THROWS_AS(modulated_rates(1.0, 0.0, p), InvalidState);
  CHECK_THROWS_AS(hypoperfusion(1.0, -1.0), InvalidState);
}

TEST_CASE("reproduction number and equilibria") {
  const PhysicalParams p;
  CHECK(reproduction_number(base_rates(p)) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(reproduction_number(base_rates(PhysicalParams::brainlike())) == doctest::Approx(0.8).epsilon(1e-15));
  const auto m = modulated_rates_at(0.2, p);
  const KineticRates r02{m.k0B, m.k1B, m.k1B_tilde, p.k12};
  CHECK(reproduction_number(r02) == doctest::Approx(1.25 / (0.75 * 0.75)).epsilon(1e-14));

  const auto e0 = homogeneous_equilibria(base_rates(p));
  CHECK(e0.u_healthy == 1.0);
  CHECK(e0.ut_healthy == 0.0);
  CHECK(e0.ut_pathogenic == doctest::Approx(-1.0 / 3.0));
  CHECK_FALSE(e0.pathogenic_physical);

  const auto e1 = homogeneous_equilibria(r02);
  CHECK(e1.u_pathogenic == doctest::Approx(0.75));
  CHECK(e1.ut_pathogenic == doctest::Approx(1.25 / 0.75 - 0.75));
  CHECK(e1.pathogenic_physical);

  const auto e2 = homogeneous_equilibria({1.0, 1.0, 0.5, 1.0});
  CHECK(e2.u_pathogenic == 0.5);
  CHECK(e2.ut_pathogenic == 1.0);
}

TEST_CASE("equilibria are fixed points of the reaction terms") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.2, 3.0);
  for (int i = 0; i < 200; ++i) {
    const KineticRates k{d(rng), d(rng), d(rng), d(rng)};
    const auto e = homogeneous_equilibria(k);
    auto res = [&](double u, double ut) {
      return std::max(std::abs(k.k0 - k.k1 * u - k.k12 * u * ut), std::abs(-k.k1_tilde * ut + k.k12 * u * ut));
    };
    CHECK(res(e.u_healthy, e.ut_healthy) < 1e-12);
    CHECK(res(e.u_pathogenic, e.ut_pathogenic) < 1e-12);
    CHECK(e.pathogenic_physical == (reproduction_number(k) > 1.0));
  }
}

TEST_CASE("pathogenic branch changes sign exactly at R0 = 1") {
  const KineticRates base{1.0, 1.0, 1.5, 1.0};
  const double k12_star = base.k1 * base.k1_tilde / base.k0;
  for (double rel : {-0.5, -1e-3, -1e-9, 1e-9, 1e-3, 0.5}) {
    KineticRates k = base;
    k.k12 = k12_star * (1.0 + rel);
    const auto e = homogeneous_equilibria(k);
    CHECK((e.ut_pathogenic > 0.0) == (rel > 0.0));
    CHECK((reproduction_number(k) > 1.0) == (rel > 0.0));
  }
  KineticRates k = base;
  k.k12 = k12_star;
  CHECK(std::abs(homogeneous_equilibria(k).ut_pathogenic) < 1e-12);
}

TEST_CASE("diffusion tensor adds an axonal rank-one term") {
  PhysicalParams p;
  const Tensor2 iso = diffusion_tensor(p);
  CHECK(iso.xx == 8.0);
  CHECK(iso.xy == 0.0);
  CHECK(iso.yy == 8.0);
  p.d_axn = 80.0;
  const Tensor2 a = diffusion_tensor(p, Point2{1.0, 0.0});
  CHECK(a.xx == 88.0);
  CHECK(a.xy == 0.0);
  CHECK(a.yy == 8.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Tensor2 t = diffusion_tensor(p, Point2{d(rng), d(rng)});
    CHECK(t.eigenvalues()[0] >= p.d_ext - 1e-12);
  }
}

TEST_CASE("permeability tensor is isotropic unless a fibre is given") {
  const Tensor2 iso = permeability_tensor(0.5);
  CHECK(iso.xx == 0.5);
  CHECK(iso.yy == 0.5);
  const Tensor2 f = permeability_tensor(2.0, Point2{0.0, 3.0});
  CHECK(f.xx == 0.0);
  CHECK(f.yy == doctest::Approx(2.0));
}

TEST_CASE("dimensionless groups of the idealized set") {
  const PhysicalParams p;
  const auto d = nondimensionalize(p);
  CHECK(d.epsilon == 1.5);
  CHECK(d.R == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(d.B == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(d.delta_ext == 1.0);
  CHECK(d.delta_axn == 0.0);
  CHECK(d.sigma_C == doctest::Approx(1.5 * 5e-3 / (8.0 * 5e-7)));
  CHECK(d.gamma_AC == 1.0);
  CHECK(d.lambda1B == 1.0);
  CHECK(d.mu0B == 1.0);
  const auto m = nondimensionalize(p, 1.0, 0.2);
  CHECK(m.gamma_AC == doctest::Approx(0.8));
  CHECK(m.gamma_CV == doctest::Approx(0.75));
  CHECK(m.lambda1B == doctest::Approx(0.75));
  CHECK(m.lambda1B_tilde == doctest::Approx(0.5));
  CHECK(m.mu0B == doctest::Approx(1.25));
}

TEST_CASE("nondimensionalization round trips") {
  for (const PhysicalParams& p : {PhysicalParams::idealized(), PhysicalParams::brainlike()}) {
    const PhysicalParams q = redimensionalize(nondimensionalize(p), p);
    for (auto [a, b] : {std::pair{p.k0, q.k0}, {p.k1, q.k1}, {p.k1_tilde, q.k1_tilde}, {p.k12, q.k12},
                        {p.d_ext, q.d_ext}, {p.d_axn, q.d_axn}, {p.k_A, q.k_A}, {p.k_V, q.k_V}, {p.k_C, q.k_C},
                        {p.beta_AC, q.beta_AC}, {p.beta_CV, q.beta_CV}})
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("outcome classification thresholds") {
  CHECK(classify_outcome(0.6, 1.0, 0.6) == Classification::Outbreak);
  CHECK(classify_outcome(0.4, 1.0, 0.6) == Classification::Indeterminate);
  CHECK(classify_outcome(1e-4, 1.0, 0.6) == Classification::Extinction);
  CHECK(classify_outcome(1.0, -0.3, 0.6) == Classification::Indeterminate);
  CHECK(classify_outcome(0.0, 1.0, 0.0) == Classification::Extinction);
  CHECK(to_string(Classification::Outbreak) == "OUTBREAK");
}
