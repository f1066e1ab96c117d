#include "neuroperf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "neuroperf/assembly.hpp"
#include "neuroperf/linsolve.hpp"
#include "neuroperf/quadrature.hpp"

namespace neuroperf {

double poisson_l2_error(int degree, std::size_t n, const std::function<double(Point2)>& exact,
                        const std::function<double(Point2)>& source, Execution exec) {
  auto mesh = std::make_shared<const Mesh>(generate_rect_mesh(n, n, 1.0, 1.0));
  auto space = build_space(mesh, degree);
  const auto op = assemble_sipg(*space, TensorField::constant(Tensor2::identity()),
                                DirichletData::function({BoundaryTag::Pial, BoundaryTag::Vent}, exact),
                                kDefaultPenalty, exec);
  auto rhs = assemble_load(*space, CoefficientField::analytic(source), exec);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += op.lift[i];
  const auto x = solve_direct(op.matrix, rhs);

  const QuadratureRule rule = triangle_rule(2 * degree + 6);
  const BasisTable tab = space->tabulate(rule.points);
  const std::size_t nb = space->dofs_per_element();
  double err2 = 0.0;
  for (std::size_t e = 0; e < mesh->num_elements(); ++e) {
    const auto& map = space->element_map(e);
    const std::span<const double> c(x.data() + e * nb, nb);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double d = contract(c, tab.values_at(q)) - exact(map.to_physical(rule.points[q]));
      err2 += rule.weights[q] * map.det * d * d;
    }
  }
  return std::sqrt(err2);
}

std::vector<ConvergenceRow> poisson_convergence_study(const std::vector<int>& degrees, std::size_t refinements,
                                                      std::size_t base_n, Execution exec) {
  constexpr double pi = std::numbers::pi;
  auto exact = [](Point2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
  auto source = [](Point2 p) { return 2.0 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y); };
  std::vector<ConvergenceRow> rows;
  for (int deg : degrees) {
    if (deg < 1 || deg > 3) throw std::invalid_argument("poisson_convergence_study: degrees must lie in {1, 2, 3}");
    std::size_t n = base_n;
    for (std::size_t k = 0; k < refinements; ++k, n *= 2) {
      ConvergenceRow r;
      r.degree = deg;
      r.n = n;
      r.h = std::sqrt(2.0) / static_cast<double>(n);
      r.l2_error = poisson_l2_error(deg, n, exact, source, exec);
      r.order = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : std::log(rows.back().l2_error / r.l2_error) / std::log(rows.back().h / r.h);
      rows.push_back(r);
    }
  }
  return rows;
}

namespace {

struct Rhs {
  double du, dut;
};

Rhs kinetics(const KineticRates& k, double u, double ut) {
  return {k.k0 - k.k1 * u - k.k12 * u * ut, -k.k1_tilde * ut + k.k12 * u * ut};
}

// Integrates with RK4; `rates(ut)` supplies the (possibly state-dependent) rates.
template <class RateFn, class Sample>
void rk4(RateFn rates, double u, double ut, double T, double dt, double sample_dt, Sample sample) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument("rk4: dt must be positive and T nonnegative");
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const std::size_t every =
      sample_dt > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_dt / dt))) : 1;
  sample(0.0, u, ut);
  double t = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double h = std::min(dt, T - t);
    auto f = [&](double a, double b) { return kinetics(rates(b), a, b); };
    const Rhs k1 = f(u, ut);
    const Rhs k2 = f(u + 0.5 * h * k1.du, ut + 0.5 * h * k1.dut);
    const Rhs k3 = f(u + 0.5 * h * k2.du, ut + 0.5 * h * k2.dut);
    const Rhs k4 = f(u + h * k3.du, ut + h * k3.dut);
    u += h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    ut += h / 6.0 * (k1.dut + 2.0 * k2.dut + 2.0 * k3.dut + k4.dut);
    t = s == steps ? T : t + h;
    if (s % every == 0 || s == steps) sample(t, u, ut);
  }
}

void push(Trajectory& tr, double t, double u, double ut) {
  tr.t.push_back(t);
  tr.u.push_back(u);
  tr.ut.push_back(ut);
}

KineticRates modulated(const PhysicalParams& p, double r) {
  const auto m = modulated_rates_at(r, p);
  return {m.k0B, m.k1B, m.k1B_tilde, p.k12};
}

}  // namespace

Trajectory ode_oracle(const KineticRates& k, double u0, double ut0, double T, double dt_oracle, double sample_dt) {
  Trajectory tr;
  rk4([&k](double) { return k; }, u0, ut0, T, dt_oracle, sample_dt,
      [&tr](double t, double u, double ut) { push(tr, t, u, ut); });
  return tr;
}

Trajectory implicit_euler_0d(const KineticRates& k, double u0, double ut0, double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("implicit_euler_0d: dt must be positive");
  Trajectory tr;
  push(tr, 0.0, u0, ut0);
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  double u = u0, ut = ut0, t = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double h = std::min(dt, T - t);
    const double u1 = (u + h * k.k0) / (1.0 + h * (k.k1 + k.k12 * std::max(ut, 0.0)));
    const double ut1 = ut / (1.0 + h * (k.k1_tilde - k.k12 * std::max(u, 0.0)));
    u = u1;
    ut = ut1;
    t = s == steps ? T : t + h;
    push(tr, t, u, ut);
  }
  return tr;
}

double max_trajectory_error(const Trajectory& a, const Trajectory& ref) {
  double err = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    while (j < ref.t.size() && ref.t[j] < a.t[i] - 1e-9) ++j;
    if (j == ref.t.size() || std::abs(ref.t[j] - a.t[i]) > 1e-9)
      throw std::invalid_argument("max_trajectory_error: sample time " + std::to_string(a.t[i]) + " missing from reference");
    err = std::max({err, std::abs(a.u[i] - ref.u[j]), std::abs(a.ut[i] - ref.ut[j])});
  }
  return err;
}

double lumped_hypoperfusion(double ut, const PhysicalParams& p) {
  auto g = [](double a, double b) { return a * b / (a + b); };
  const double g0 = g(p.beta_AC, p.beta_CV);
  const double gu = g(transfer_AC(ut, p), transfer_CV(ut, p));
  return std::clamp(1.0 - gu / g0, 0.0, 1.0);
}

Coupled0dResult coupled_0d_oracle(const PhysicalParams& p, double u0, double ut0, double T, double dt, bool feedback,
                                  double sample_dt) {
  Coupled0dResult res;
  auto rates = [&](double ut) { return modulated(p, feedback ? lumped_hypoperfusion(ut, p) : 0.0); };
  double r_max = 0.0;
  rk4(rates, u0, ut0, T, dt, 0.0, [&](double t, double u, double ut) {
    const double r = feedback ? lumped_hypoperfusion(ut, p) : 0.0;
    r_max = std::max(r_max, r);
    const bool last = T - t <= 1e-12;
    const bool on_grid = sample_dt <= 0.0 || std::abs(t / sample_dt - std::round(t / sample_dt)) < 1e-6;
    if (on_grid || last) {
      if (res.trajectory.t.empty() || res.trajectory.t.back() < t) {
        push(res.trajectory, t, u, ut);
        res.r.push_back(r);
      }
    }
  });
  res.r_max = r_max;
  res.ut_pathogenic = homogeneous_equilibria(modulated(p, r_max)).ut_pathogenic;
  res.classification = classify_outcome(res.trajectory.ut.back(), res.ut_pathogenic, ut0);
  return res;
}

SeparatrixBracket separatrix_bracket(const PhysicalParams& p, double u0, double lo, double hi, double T, double tol,
                                     double dt) {
  auto breaks_out = [&](double a) {
    return coupled_0d_oracle(p, u0, a, T, dt, true, T).classification == Classification::Outbreak;
  };
  if (breaks_out(lo)) throw std::invalid_argument("separatrix_bracket: lower amplitude already breaks out");
  if (!breaks_out(hi)) throw std::invalid_argument("separatrix_bracket: upper amplitude does not break out");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (breaks_out(mid) ? hi : lo) = mid;
  }
  return {lo, hi};
}

std::vector<BifurcationRow> bifurcation_scan(const KineticRates& base, const std::vector<double>& k12_values,
                                             double u0, double ut0, double T, double dt) {
  std::vector<BifurcationRow> rows;
  for (double k12 : k12_values) {
    KineticRates k = base;
    k.k12 = k12;
    BifurcationRow r;
    r.k12 = k12;
    r.R0 = reproduction_number(k);
    r.ut_pathogenic = homogeneous_equilibria(k).ut_pathogenic;
    r.ut_long_time = ode_oracle(k, u0, ut0, T, dt, T).ut.back();
    r.pathogenic_limit = r.ut_long_time > 1e-6;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace neuroperf
