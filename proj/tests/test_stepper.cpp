#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "neuroperf/errors.hpp"
#include "neuroperf/stepper.hpp"
#include "neuroperf/verify.hpp"

using namespace neuroperf;

namespace {

SimulationConfig small_config(std::size_t nx = 4) {
  SimulationConfig c;
  c.mesh.nx = nx;
  c.mesh.ny = 3 * nx;
  c.dt = 0.1;
  c.t_final = 1.0;
  c.snapshot_every = 0.0;
  return c;
}

// Perfusion that ignores u_tilde, so the hypoperfusion ratio vanishes identically.
void freeze_perfusion(PhysicalParams& p) {
  p.k_C_ab = p.k_C;
  p.beta_AC_ab = p.beta_AC;
  p.beta_CV_ab = p.beta_CV;
}

double max_abs_diff(const FieldVector& a, const FieldVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return m;
}

bool same(const Pressures& a, const Pressures& b) {
  return a.p_A.coeffs() == b.p_A.coeffs() && a.p_C.coeffs() == b.p_C.coeffs() && a.p_V.coeffs() == b.p_V.coeffs();
}

}  // namespace

TEST_CASE("healthy equilibrium is a fixed point of the coupled scheme") {
  auto c = small_config();
  c.t_final = 10.0;  // 100 steps
  Simulation sim(c);
  auto s = sim.initial_state();
  const FieldVector u0 = s.u, ut0 = s.ut;
  for (int n = 0; n < 100; ++n) {
    auto [u, ut] = sim.step_proteins(s.u, s.ut, s.pressures, c.dt);
    CHECK(max_abs_diff(u, s.u) < 1e-10);
    CHECK(max_abs_diff(ut, s.ut) < 1e-10);
    Pressures p = sim.solve_pressure_block(ut);
    CHECK(max_abs_diff(p.p_A, s.pressures.p_A) < 1e-10);
    CHECK(max_abs_diff(p.p_C, s.pressures.p_C) < 1e-10);
    CHECK(max_abs_diff(p.p_V, s.pressures.p_V) < 1e-10);
    s.u = std::move(u);
    s.ut = std::move(ut);
    s.pressures = std::move(p);
  }
  CHECK(max_abs_diff(s.u, u0) < 1e-9);
  CHECK(max_abs_diff(s.ut, ut0) == 0.0);
}

TEST_CASE("zero u_tilde reproduces the healthy baseline pressures") {
  Simulation sim(small_config());
  const auto& hb = sim.baseline();
  CHECK(hb.min_Q_H > 0.0);
  const Pressures p = sim.solve_pressure_block(FieldVector(sim.protein_space(), FieldRole::UTilde));
  CHECK(same(p, hb.pressures));
}

TEST_CASE("misfolded protein raises the arterial pressure and lowers the CBF rate") {
  Simulation sim(small_config());
  const auto& hb = sim.baseline();
  const auto ut = l2_project(sim.protein_space(), [](Point2) { return 1.0; }, FieldRole::UTilde);
  const Pressures p = sim.solve_pressure_block(ut);
  // Weaker arterial-capillary transfer leaks less out of the arterial network.
  CHECK(p.p_A.integral() > hb.pressures.p_A.integral());
  const auto r = sim.cbf_reduction_field(p, ut);
  for (std::size_t e = 0; e < sim.mesh().num_elements(); ++e) CHECK(r.mean(e) > 0.0);
}

TEST_CASE("a constant-field protein step matches the 0D scheme") {
  auto c = small_config();
  freeze_perfusion(c.params);
  c.initial.ut0 = 0.4;
  c.initial.u0 = 0.7;
  Simulation sim(c);
  auto s = sim.initial_state();
  const auto ref = implicit_euler_0d(base_rates(c.params), c.initial.u0, c.initial.ut0, 5 * c.dt, c.dt);
  for (int n = 1; n <= 5; ++n) {
    auto [u, ut] = sim.step_proteins(s.u, s.ut, s.pressures, c.dt);
    for (std::size_t e = 0; e < sim.mesh().num_elements(); ++e) {
      CHECK(u.mean(e) == doctest::Approx(ref.u[n]).epsilon(1e-12));
      CHECK(ut.mean(e) == doctest::Approx(ref.ut[n]).epsilon(1e-12));
    }
    s.u = std::move(u);
    s.ut = std::move(ut);
  }
}

TEST_CASE("protein step rejects a nonpositive time step") {
  Simulation sim(small_config());
  auto s = sim.initial_state();
  CHECK_THROWS_AS(sim.step_proteins(s.u, s.ut, s.pressures, 0.0), std::invalid_argument);
}

TEST_CASE("stored pressures are those of the stored u_tilde") {
  auto c = small_config();
  c.initial.seeds.push_back({SubdomainSpec::disk({0.05, 0.1}, 2e-3), 0.8});
  c.snapshot_every = c.dt;
  c.t_final = 0.5;
  Simulation sim(c), check(c);
  std::size_t seen = 0;
  RunObserver obs;
  obs.on_snapshot = [&](const SimulationState& s) {
    CHECK(same(s.pressures, check.solve_pressure_block(s.ut)));
    ++seen;
  };
  sim.run(obs);
  CHECK(seen == 6);
}

TEST_CASE("snapshot cadence") {
  auto c = small_config();
  for (double every : {0.1, 0.3, 0.5, 2.0}) {
    c.snapshot_every = every;
    std::size_t seen = 0;
    RunObserver obs;
    obs.on_snapshot = [&](const SimulationState&) { ++seen; };
    const auto res = run_simulation(c, obs);
    const auto cadence = static_cast<std::size_t>(std::llround(every / c.dt));
    CHECK(seen == c.num_steps() / cadence + 1);
    CHECK(res.rows.size() == c.num_steps() + 1);
  }
}

TEST_CASE("runs are deterministic and independent of the execution mode") {
  auto c = small_config();
  c.initial.seeds.push_back({SubdomainSpec::disk({0.03, 0.2}, 1e-3), 0.6});
  const auto a = run_simulation(c, {}, Execution::Parallel);
  const auto b = run_simulation(c, {}, Execution::Serial);
  REQUIRE(a.final_state);
  REQUIRE(b.final_state);
  CHECK(a.final_state->ut.coeffs() == b.final_state->ut.coeffs());
  CHECK(a.final_state->u.coeffs() == b.final_state->u.coeffs());
}

TEST_CASE("a pressure system without Dirichlet faces is rejected") {
  auto c = small_config();
  c.dirichlet_tags = {BoundaryTag::Vent};
  try {
    Simulation sim(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "perfusion.dirichlet");
  }
}

TEST_CASE("regions outside the domain are rejected") {
  auto c = small_config();
  c.injuries.push_back({SubdomainSpec::disk({5.0, 5.0}, 1e-4), 4.25e-7, 3.25e-7, std::nullopt, 0.4});
  CHECK_THROWS_AS(Simulation{c}, ConfigError);
  c = small_config();
  c.initial.seeds.push_back({SubdomainSpec::disk({-1.0, 0.0}, 1e-2), 0.5});
  CHECK_THROWS_AS(Simulation{c}, ConfigError);
}

TEST_CASE("injuries override base perfusion locally") {
  auto c = small_config();
  c.injuries.push_back({SubdomainSpec::disk({0.05, 0.02}, 1e-3), 4.25e-7, 3.25e-7, std::nullopt, 0.4});
  Simulation sim(c);
  const auto in = sim.local_perfusion({0.05, 0.02});
  CHECK(in.beta_AC == 4.25e-7);
  CHECK(in.beta_CV == 3.25e-7);
  CHECK(in.k_C == doctest::Approx(0.4 * c.params.k_C));
  const auto out = sim.local_perfusion({0.05, 0.3});
  CHECK(out.beta_AC == c.params.beta_AC);
  CHECK(out.k_C == c.params.k_C);
}

TEST_CASE("injured runs report a positive initial in-injury reduction") {
  auto c = small_config(6);
  c.t_final = 0.1;
  c.injuries.push_back({SubdomainSpec::disk({0.05, 0.05}, 1e-3), 4.25e-7, 3.25e-7, std::nullopt, 0.4});
  const auto res = run_simulation(c);
  REQUIRE(res.initial_injury_reduction);
  CHECK(*res.initial_injury_reduction > 0.0);
  CHECK(*res.initial_injury_reduction < 1.0);
  CHECK_FALSE(run_simulation(small_config()).initial_injury_reduction);
}

TEST_CASE("near-pure conversion conserves total protein to first order in dt") {
  auto c = small_config();
  freeze_perfusion(c.params);
  c.params.k0 = c.params.k1 = c.params.k1_tilde = 1e-12;
  c.params.rate_floor = 1e-12;
  c.initial.seeds.push_back({SubdomainSpec::disk({0.05, 0.2}, 4e-3), 0.5});
  c.t_final = 1.0;
  double drift_coarse = 0.0;
  for (double dt : {0.02, 0.01}) {
    c.dt = dt;
    Simulation sim(c);
    auto s = sim.initial_state();
    const double m0 = s.u.integral() + s.ut.integral();
    double drift = 0.0;
    for (std::size_t n = 0; n < c.num_steps(); ++n) {
      auto [u, ut] = sim.step_proteins(s.u, s.ut, s.pressures, dt);
      s.u = std::move(u);
      s.ut = std::move(ut);
      drift = std::max(drift, std::abs(s.u.integral() + s.ut.integral() - m0) / m0);
    }
    if (dt == 0.02) drift_coarse = drift;
    else {
      // Measured 1.378e-3; the lagged conversion terms cost O(dt).
      CHECK(drift < 1.5e-3);
      CHECK(drift < 0.6 * drift_coarse);
    }
  }
}

TEST_CASE("classification of a fully seeded domain") {
  auto c = small_config();
  c.initial.ut0 = 0.9;
  c.t_final = 0.2;
  const auto res = run_simulation(c);
  CHECK(res.seed_amplitude == 0.9);
  CHECK(res.classification == Classification::Outbreak);
  CHECK(res.rows.back().invaded_area == doctest::Approx(0.04).epsilon(1e-9));
}
