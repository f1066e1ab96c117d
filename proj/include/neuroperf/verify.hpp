#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "neuroperf/model.hpp"
#include "neuroperf/parallel.hpp"

namespace neuroperf {

// ---- SIPG manufactured solutions ----

struct ConvergenceRow {
  int degree = 1;
  std::size_t n = 0;  // cells per side
  double h = 0.0;     // largest element diameter
  double l2_error = 0.0;
  double order = 0.0;  // against the previous row of the same degree; NaN on the first
};

// -Laplace(u) = f on the unit square, u = g on the boundary, n x n structured mesh.
// Returns the L2 error of the SIPG solution, measured with a quadrature of order 2l+6.
double poisson_l2_error(int degree, std::size_t n, const std::function<double(Point2)>& exact,
                        const std::function<double(Point2)>& source, Execution exec = Execution::Parallel);

// u = sin(pi x) sin(pi y), meshes base_n * 2^k for k < refinements.
std::vector<ConvergenceRow> poisson_convergence_study(const std::vector<int>& degrees, std::size_t refinements,
                                                      std::size_t base_n = 8, Execution exec = Execution::Parallel);

// ---- Reaction kinetics ----

struct Trajectory {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> ut;
};

// Classical RK4 on u' = k0 - k1 u - k12 u ut, ut' = -k1~ ut + k12 u ut with step dt_oracle,
// sampled every `sample_dt` (and at T). sample_dt = 0 records every step.
Trajectory ode_oracle(const KineticRates& k, double u0, double ut0, double T, double dt_oracle = 1e-4,
                      double sample_dt = 0.0);

// The lagged implicit Euler scheme of the protein step, applied to spatially constant fields.
Trajectory implicit_euler_0d(const KineticRates& k, double u0, double ut0, double T, double dt);

// Max over the common sample times of |u - u_ref| and |ut - ut_ref|; sample times must match.
double max_trajectory_error(const Trajectory& a, const Trajectory& ref);

// ---- Coupled 0D feedback surrogate ----

// Lumped perfusion: arterial and venous pressures fixed, capillary pressure set by the series
// conductances beta_AC(ut), beta_CV(ut). Flow G(ut) = bAC bCV / (bAC + bCV) (p_a - p_v) and
// r(ut) = 1 - G(ut) / G(0).
double lumped_hypoperfusion(double ut, const PhysicalParams& p);

struct Coupled0dResult {
  Trajectory trajectory;
  std::vector<double> r;  // hypoperfusion at the sample times
  double r_max = 0.0;
  double ut_pathogenic = 0.0;  // at r_max
  Classification classification = Classification::Indeterminate;
};

// RK4 on the kinetics with rates modulated by lumped_hypoperfusion(ut). `feedback` = false
// freezes r at 0.
Coupled0dResult coupled_0d_oracle(const PhysicalParams& p, double u0, double ut0, double T, double dt = 1e-3,
                                  bool feedback = true, double sample_dt = 1.0);

struct SeparatrixBracket {
  double extinct = 0.0;   // largest amplitude found not to break out
  double outbreak = 0.0;  // smallest amplitude found to break out
};

// Bisects the seed amplitude ut0 in [lo, hi] (u0 fixed) until hi - lo <= tol. Throws
// std::invalid_argument if lo breaks out or hi does not.
SeparatrixBracket separatrix_bracket(const PhysicalParams& p, double u0, double lo, double hi, double T,
                                     double tol = 1e-3, double dt = 1e-3);

// ---- Transcritical scan ----

struct BifurcationRow {
  double k12 = 0.0;
  double R0 = 0.0;
  double ut_pathogenic = 0.0;
  double ut_long_time = 0.0;  // ode_oracle from (u0, ut0) at T
  bool pathogenic_limit = false;  // long-time state away from the healthy one
};

std::vector<BifurcationRow> bifurcation_scan(const KineticRates& base, const std::vector<double>& k12_values,
                                             double u0, double ut0, double T, double dt = 1e-2);

}  // namespace neuroperf
