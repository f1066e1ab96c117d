#include "neuroperf/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "neuroperf/errors.hpp"

namespace neuroperf {

namespace {

constexpr std::size_t kMaxStoredWarnings = 50;

double dist_to_box(Point2 c, Point2 lo, Point2 hi) {
  const double dx = std::max({lo.x - c.x, 0.0, c.x - hi.x});
  const double dy = std::max({lo.y - c.y, 0.0, c.y - hi.y});
  return std::hypot(dx, dy);
}

bool intersects(const SubdomainSpec& s, Point2 lo, Point2 hi) {
  if (s.kind == SubdomainSpec::Kind::Whole) return true;
  const double d = dist_to_box(s.center, lo, hi);
  return d * d < s.radius_sq;
}

void check_finite(const FieldVector& f, std::size_t step, const char* name) {
  for (double v : f.coeffs())
    if (!std::isfinite(v))
      throw NumericalError(std::string("non-finite ") + name + " at step " + std::to_string(step));
}

}  // namespace

Mesh MeshSource::build() const {
  if (kind == Kind::File) return load_mesh(path);
  return generate_rect_mesh(nx, ny, lx, ly);
}

double InitialCondition::ut_at(Point2 x) const {
  for (const auto& s : seeds)
    if (s.region.contains(x)) return s.amplitude;
  return ut0;
}

double InitialCondition::seed_amplitude() const {
  double a = ut0;
  for (const auto& s : seeds) a = std::max(a, s.amplitude);
  return a;
}

void SimulationConfig::validate() const {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("time.dt", "must be positive");
  if (!(t_final > 0.0)) throw ConfigError("time.t_final", "must be positive");
  if (num_steps() > max_steps)
    throw ConfigError("time.max_steps", "t_final / dt = " + std::to_string(num_steps()) + " exceeds the step cap");
  if (degree_pressure < 1 || degree_pressure > 3) throw ConfigError("discretization.degree_pressure", "must be 1, 2 or 3");
  if (degree_protein < 1 || degree_protein > 3) throw ConfigError("discretization.degree_protein", "must be 1, 2 or 3");
  if (!(penalty > 0.0)) throw ConfigError("discretization.penalty", "must be positive");
  if (!(snapshot_every >= 0.0)) throw ConfigError("output.snapshot_every", "must be nonnegative");
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
  if (mesh.kind == MeshSource::Kind::Generated) {
    if (mesh.nx == 0) throw ConfigError("mesh.nx", "must be positive");
    if (mesh.ny == 0) throw ConfigError("mesh.ny", "must be positive");
    if (!(mesh.lx > 0.0)) throw ConfigError("mesh.lx", "must be positive");
    if (!(mesh.ly > 0.0)) throw ConfigError("mesh.ly", "must be positive");
  }
  if (dirichlet_tags.empty()) throw ConfigError("perfusion.dirichlet", "at least one Dirichlet boundary tag is required");
  if (initial.u0 < 0.0) throw ConfigError("initial.u0", "must be nonnegative");
  if (initial.ut0 < 0.0) throw ConfigError("initial.ut0", "must be nonnegative");
  for (std::size_t i = 0; i < injuries.size(); ++i) {
    const auto& inj = injuries[i];
    const std::string key = "injury." + std::to_string(i);
    if (inj.beta_AC && !(*inj.beta_AC >= params.beta_AC_ab))
      throw ConfigError(key + ".beta_AC", "must not fall below perfusion.beta_AC_ab");
    if (inj.beta_CV && !(*inj.beta_CV >= params.beta_CV_ab))
      throw ConfigError(key + ".beta_CV", "must not fall below perfusion.beta_CV_ab");
    if (!(inj.k_C_scale > 0.0)) throw ConfigError(key + ".k_C_scale", "must be positive");
    const double kc = (inj.k_C ? *inj.k_C : params.k_C) * inj.k_C_scale;
    if (!(kc >= params.k_C_ab)) throw ConfigError(key + ".k_C", "must not fall below perfusion.k_C_ab");
  }
}

std::size_t SimulationConfig::num_steps() const {
  const double n = t_final / dt;
  const double r = std::round(n);
  if (std::abs(n - r) <= 1e-9 * std::max(1.0, n)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(n));
}

Simulation::Simulation(SimulationConfig config, Execution exec) : config_(std::move(config)), exec_(exec) {
  config_.validate();
  mesh_ = std::make_shared<const Mesh>(config_.mesh.build());
  const auto [lo, hi] = mesh_->bounding_box();
  for (std::size_t i = 0; i < config_.injuries.size(); ++i)
    if (!intersects(config_.injuries[i].region, lo, hi))
      throw ConfigError("injury." + std::to_string(i) + ".center", "region does not intersect the domain");
  for (std::size_t i = 0; i < config_.initial.seeds.size(); ++i)
    if (!intersects(config_.initial.seeds[i].region, lo, hi))
      throw ConfigError("seed." + std::to_string(i) + ".center", "region does not intersect the domain");
  bool any_dirichlet = false;
  for (const auto& bf : mesh_->boundary_faces())
    if (std::find(config_.dirichlet_tags.begin(), config_.dirichlet_tags.end(), bf.tag) != config_.dirichlet_tags.end())
      any_dirichlet = true;
  if (!any_dirichlet)
    throw ConfigError("perfusion.dirichlet", "no boundary face carries a Dirichlet tag; the pressure system is singular");

  vp_ = build_space(mesh_, config_.degree_pressure);
  vu_ = build_space(mesh_, config_.degree_protein);

  const auto& p = config_.params;
  const double pa = p.p_arteries * kPaPerMmHg, pv = p.p_veins * kPaPerMmHg;
  const auto fibre = config_.perfusion_fibre;
  a_A_ = assemble_sipg(*vp_, TensorField::constant(permeability_tensor(p.k_A * kM2PerMm2, fibre)),
                       DirichletData::constant(config_.dirichlet_tags, pa), config_.penalty, exec_);
  a_V_ = assemble_sipg(*vp_, TensorField::constant(permeability_tensor(p.k_V * kM2PerMm2, fibre)),
                       DirichletData::constant(config_.dirichlet_tags, pv), config_.penalty, exec_);
  const Tensor2 d = kM2PerMm2 * diffusion_tensor(p, config_.axon_direction);
  a_H_ = assemble_sipg(*vu_, TensorField::constant(d), DirichletData::none(), config_.penalty, exec_).matrix;
  mass_u_ = assemble_mass(*vu_, CoefficientField::constant(1.0), exec_);
}

LocalPerfusion Simulation::local_perfusion(Point2 x) const {
  const auto& p = config_.params;
  LocalPerfusion l{p.k_C, p.beta_AC, p.beta_CV};
  for (const auto& inj : config_.injuries) {
    if (!inj.region.contains(x)) continue;
    if (inj.beta_AC) l.beta_AC = *inj.beta_AC;
    if (inj.beta_CV) l.beta_CV = *inj.beta_CV;
    l.k_C = (inj.k_C ? *inj.k_C : p.k_C) * inj.k_C_scale;
  }
  return l;
}

std::vector<double> Simulation::solve(DirectSolver& direct, const SparseMatrix& A, std::span<const double> b,
                                      std::span<const double> guess, std::size_t block) {
  if (config_.solver.kind == SolverOptions::Kind::CG) {
    try {
      CgOptions o;
      o.tol = config_.solver.tol;
      o.block_size = block;
      return solve_cg(A, b, o, guess).x;
    } catch (const ConvergenceError& e) {
      if (warnings_.size() < kMaxStoredWarnings)
        warnings_.push_back(std::string("CG failed, falling back to direct solve: ") + e.what());
    }
  }
  direct.factorize(A);
  return direct.solve(b);
}

namespace {

Pressures split(const std::shared_ptr<const DgSpace>& vp, const std::vector<double>& x) {
  const std::size_t n = vp->num_dofs();
  return {FieldVector(vp, std::vector<double>(x.begin(), x.begin() + n), FieldRole::PA),
          FieldVector(vp, std::vector<double>(x.begin() + n, x.begin() + 2 * n), FieldRole::PC),
          FieldVector(vp, std::vector<double>(x.begin() + 2 * n, x.end()), FieldRole::PV)};
}

}  // namespace

Pressures Simulation::solve_pressure_block(const FieldVector& ut) {
  const auto& p = config_.params;
  auto uts = std::make_shared<const FieldVector>(ut);
  auto kc = CoefficientField::pointwise([this, uts, &p](const PointContext& c) {
    return constricted(field_value(*uts, c), local_perfusion(c.x).k_C, p.k_C_ab, p.alpha_kC) * kM2PerMm2;
  });
  auto bac = CoefficientField::pointwise([this, uts, &p](const PointContext& c) {
    return constricted(field_value(*uts, c), local_perfusion(c.x).beta_AC, p.beta_AC_ab, p.alpha_beta_AC);
  });
  auto bcv = CoefficientField::pointwise([this, uts, &p](const PointContext& c) {
    return constricted(field_value(*uts, c), local_perfusion(c.x).beta_CV, p.beta_CV_ab, p.alpha_beta_CV);
  });
  const SparseMatrix a_C = assemble_sipg(*vp_, TensorField::isotropic(kc), DirichletData::none(),
                                         config_.penalty, exec_).matrix;
  const SparseMatrix m_ac = assemble_mass(*vp_, bac, exec_);
  const SparseMatrix m_cv = assemble_mass(*vp_, bcv, exec_);

  BlockSystem sys;
  sys.blocks[0][0] = linear_combination(1.0, a_A_.matrix, 1.0, m_ac);
  sys.blocks[0][1] = linear_combination(-1.0, m_ac, 0.0, m_ac);
  sys.blocks[1][0] = sys.blocks[0][1];
  sys.blocks[1][1] = linear_combination(1.0, a_C, 1.0, linear_combination(1.0, m_ac, 1.0, m_cv));
  sys.blocks[1][2] = linear_combination(-1.0, m_cv, 0.0, m_cv);
  sys.blocks[2][1] = sys.blocks[1][2];
  sys.blocks[2][2] = linear_combination(1.0, a_V_.matrix, 1.0, m_cv);
  sys.rhs[0] = a_A_.lift;
  sys.rhs[1] = std::vector<double>(vp_->num_dofs(), 0.0);
  sys.rhs[2] = a_V_.lift;
  const auto [A, b] = compose_block(sys);
  const auto x = solve(pressure_solver_, A, b, {}, vp_->dofs_per_element());
  return split(vp_, x);
}

const HealthyBaseline& Simulation::baseline() {
  if (baseline_) return *baseline_;
  // Q_H is the uninjured reference flow: solve with the injuries removed.
  auto injuries = std::move(config_.injuries);
  config_.injuries.clear();
  Pressures pr = [&] {
    try {
      return solve_pressure_block(FieldVector(vu_, FieldRole::UTilde));
    } catch (...) {
      config_.injuries = std::move(injuries);
      throw;
    }
  }();
  config_.injuries = std::move(injuries);

  HealthyBaseline hb{std::move(pr), std::numeric_limits<double>::infinity()};
  const auto& rule = vu_->volume_rule();
  const auto& tab = vu_->volume_table();
  const double b = config_.params.beta_AC, rho = config_.params.rho;
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    const auto& map = vu_->element_map(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointContext c{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q), vu_->degree(), q};
      const double qh = cbf_rate(field_value(hb.pressures.p_A, c), field_value(hb.pressures.p_C, c), b, rho);
      hb.min_Q_H = std::min(hb.min_Q_H, qh);
    }
  }
  if (!(hb.min_Q_H > 0.0)) {
    std::ostringstream os;
    os << "healthy CBF rate is not positive everywhere (min Q_H = " << hb.min_Q_H
       << "); check that p_arteries exceeds p_veins";
    throw InvalidState(os.str());
  }
  baseline_ = std::move(hb);
  return *baseline_;
}

double Simulation::cbf_reduction_at(const PointContext& c, const Pressures& p, const FieldVector& ut) const {
  const auto& prm = config_.params;
  const auto& hb = *baseline_;
  const double qh = cbf_rate(field_value(hb.pressures.p_A, c), field_value(hb.pressures.p_C, c), prm.beta_AC, prm.rho);
  const double beta = constricted(field_value(ut, c), local_perfusion(c.x).beta_AC, prm.beta_AC_ab, prm.alpha_beta_AC);
  const double q = cbf_rate(field_value(p.p_A, c), field_value(p.p_C, c), beta, prm.rho);
  return hypoperfusion(q, qh);
}

std::pair<FieldVector, FieldVector> Simulation::step_proteins(const FieldVector& u, const FieldVector& ut,
                                                              const Pressures& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_proteins: dt must be positive");
  baseline();
  const auto& prm = config_.params;
  const std::size_t nq = vu_->volume_rule().size();
  const std::size_t ne = mesh_->num_elements();

  // Modulated rates at every protein quadrature point, from the new pressures and lagged u_tilde.
  std::vector<ModulatedRates> rates(ne * nq);
  {
    const auto& rule = vu_->volume_rule();
    const auto& tab = vu_->volume_table();
    const auto n = static_cast<std::ptrdiff_t>(ne);
#pragma omp parallel for schedule(static) if (exec_ == Execution::Parallel)
    for (std::ptrdiff_t ei = 0; ei < n; ++ei) {
      const auto e = static_cast<std::size_t>(ei);
      const auto& map = vu_->element_map(e);
      for (std::size_t q = 0; q < nq; ++q) {
        const PointContext c{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q), vu_->degree(), q};
        rates[e * nq + q] = modulated_rates_at(cbf_reduction_at(c, p, ut), prm);
      }
    }
  }
  auto rate = [&rates, nq](const PointContext& c) -> const ModulatedRates& { return rates[c.elem * nq + c.qp]; };

  const auto uts = std::make_shared<const FieldVector>(ut);
  const auto us = std::make_shared<const FieldVector>(u);
  const SparseMatrix m_u = assemble_mass(*vu_, CoefficientField::pointwise([&](const PointContext& c) {
    return 1.0 + dt * (rate(c).k1B + prm.k12 * std::max(field_value(*uts, c), 0.0));
  }), exec_);
  const SparseMatrix m_ut = assemble_mass(*vu_, CoefficientField::pointwise([&](const PointContext& c) {
    return 1.0 + dt * (rate(c).k1B_tilde - prm.k12 * std::max(field_value(*us, c), 0.0));
  }), exec_);
  const auto load = assemble_load(*vu_, CoefficientField::pointwise([&](const PointContext& c) { return rate(c).k0B; }), exec_);

  std::vector<double> rhs_u(vu_->num_dofs()), rhs_ut(vu_->num_dofs());
  mass_u_.multiply(u.coeffs(), rhs_u, exec_);
  for (std::size_t i = 0; i < rhs_u.size(); ++i) rhs_u[i] += dt * load[i];
  mass_u_.multiply(ut.coeffs(), rhs_ut, exec_);

  const std::size_t nb = vu_->dofs_per_element();
  auto x_u = solve(u_solver_, linear_combination(1.0, m_u, dt, a_H_), rhs_u, u.coeffs(), nb);
  auto x_ut = solve(ut_solver_, linear_combination(1.0, m_ut, dt, a_H_), rhs_ut, ut.coeffs(), nb);
  return {FieldVector(vu_, std::move(x_u), FieldRole::U), FieldVector(vu_, std::move(x_ut), FieldRole::UTilde)};
}

FieldVector Simulation::cbf_reduction_field(const Pressures& p, const FieldVector& ut) const {
  FieldVector out(vu_, FieldRole::Auxiliary);
  const auto& rule = vu_->volume_rule();
  const auto& tab = vu_->volume_table();
  const std::size_t nb = vu_->dofs_per_element();
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    const auto& map = vu_->element_map(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointContext c{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q), vu_->degree(), q};
      const double r = cbf_reduction_at(c, p, ut) * rule.weights[q];
      for (std::size_t i = 0; i < nb; ++i) out.coeffs()[e * nb + i] += r * tab.value(q, i);
    }
  }
  return out;
}

double Simulation::mean_cbf_reduction(const SubdomainSpec& region, const Pressures& p, const FieldVector& ut) const {
  const auto& rule = vu_->volume_rule();
  const auto& tab = vu_->volume_table();
  double num = 0.0, den = 0.0;
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    const auto& map = vu_->element_map(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointContext c{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q), vu_->degree(), q};
      if (!region.contains(c.x)) continue;
      const double w = rule.weights[q] * map.det;
      num += w * cbf_reduction_at(c, p, ut);
      den += w;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

Diagnostics Simulation::diagnose(std::size_t step, double time, const FieldVector& u, const FieldVector& ut,
                                 const Pressures& p, double r_max_so_far, double seed) const {
  Diagnostics d;
  d.step = step;
  d.time = time;
  d.mass_u = u.integral();
  d.mass_ut = ut.integral();
  d.max_ut = -std::numeric_limits<double>::infinity();
  d.min_ut = std::numeric_limits<double>::infinity();
  d.min_u = std::numeric_limits<double>::infinity();
  const auto& rule = vu_->volume_rule();
  const auto& tab = vu_->volume_table();
  const std::size_t ne = mesh_->num_elements(), nq = rule.size();
  std::vector<double> r(ne * nq), utq(ne * nq), wq(ne * nq);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& map = vu_->element_map(e);
    const auto cu = u.element_coeffs(e), cut = ut.element_coeffs(e);
    for (std::size_t q = 0; q < nq; ++q) {
      const PointContext c{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q), vu_->degree(), q};
      const double uv = contract(cu, tab.values_at(q)), utv = contract(cut, tab.values_at(q));
      d.max_ut = std::max(d.max_ut, utv);
      d.min_ut = std::min(d.min_ut, utv);
      d.min_u = std::min(d.min_u, uv);
      r[e * nq + q] = cbf_reduction_at(c, p, ut);
      utq[e * nq + q] = utv;
      wq[e * nq + q] = rule.weights[q] * map.det;
      d.max_cbf_reduction = std::max(d.max_cbf_reduction, r[e * nq + q]);
    }
  }
  const double r_max = std::max(r_max_so_far, d.max_cbf_reduction);
  const auto m = modulated_rates_at(r_max, config_.params);
  const double ut_path = homogeneous_equilibria({m.k0B, m.k1B, m.k1B_tilde, config_.params.k12}).ut_pathogenic;
  if (ut_path > 0.0) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k)
      if (utq[k] > 0.5 * ut_path) {
        num += wq[k] * r[k];
        den += wq[k];
      }
    d.plateau_cbf_reduction = den > 0.0 ? num / den : 0.0;
    d.invaded_area = den;
  }
  d.classification = classify_outcome(d.max_ut, ut_path, seed);
  return d;
}

SimulationState Simulation::initial_state() {
  baseline();
  const auto& ic = config_.initial;
  FieldVector u = l2_project(vu_, [&](Point2) { return ic.u0; }, FieldRole::U);
  FieldVector ut = l2_project(vu_, [&](Point2 x) { return ic.ut_at(x); }, FieldRole::UTilde);
  Pressures p = solve_pressure_block(ut);
  SimulationState s{0, 0.0, std::move(u), std::move(ut), std::move(p), {}};
  s.diagnostics = diagnose(0, 0.0, s.u, s.ut, s.pressures, 0.0, ic.seed_amplitude());
  return s;
}

RunResult Simulation::run(const RunObserver& observer) {
  RunResult res;
  res.seed_amplitude = config_.initial.seed_amplitude();
  SimulationState s = initial_state();
  if (!config_.injuries.empty()) {
    // Mean over the union of injury regions, each point counted once.
    std::vector<InjurySpec> inj = config_.injuries;
    double num = 0.0, den = 0.0;
    const auto& rule = vu_->volume_rule();
    const auto& tab = vu_->volume_table();
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
      const auto& map = vu_->element_map(e);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const PointContext c{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q), vu_->degree(), q};
        if (std::none_of(inj.begin(), inj.end(), [&](const InjurySpec& i) { return i.region.contains(c.x); }))
          continue;
        const double w = rule.weights[q] * map.det;
        num += w * cbf_reduction_at(c, s.pressures, s.ut);
        den += w;
      }
    }
    if (den > 0.0) res.initial_injury_reduction = num / den;
  }

  const std::size_t n = config_.num_steps();
  const double dt_nominal = config_.dt;
  std::size_t cadence = 0;
  if (config_.snapshot_every > 0.0)
    cadence = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config_.snapshot_every / dt_nominal)));

  double r_max = s.diagnostics.max_cbf_reduction;
  res.rows.push_back(s.diagnostics);
  if (observer.on_step) observer.on_step(s.diagnostics);
  if (observer.on_snapshot && cadence) observer.on_snapshot(s);

  double t = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double dt = std::min(dt_nominal, config_.t_final - t);
    auto [u1, ut1] = step_proteins(s.u, s.ut, s.pressures, dt > 0 ? dt : dt_nominal);
    check_finite(u1, k, "u");
    check_finite(ut1, k, "u_tilde");
    t = k == n ? config_.t_final : t + dt_nominal;
    Pressures p1 = solve_pressure_block(ut1);
    check_finite(p1.p_A, k, "p_A");
    check_finite(p1.p_C, k, "p_C");
    check_finite(p1.p_V, k, "p_V");
    s.step = k;
    s.time = t;
    s.u = std::move(u1);
    s.ut = std::move(ut1);
    s.pressures = std::move(p1);
    s.diagnostics = diagnose(k, t, s.u, s.ut, s.pressures, r_max, res.seed_amplitude);
    r_max = std::max(r_max, s.diagnostics.max_cbf_reduction);
    if (s.diagnostics.min_ut < -1e-3 * std::max(s.diagnostics.max_ut, 0.0) && warnings_.size() < kMaxStoredWarnings) {
      std::ostringstream os;
      os << "step " << k << ": positivity loss, min u_tilde = " << s.diagnostics.min_ut;
      warnings_.push_back(os.str());
    }
    res.rows.push_back(s.diagnostics);
    if (observer.on_step) observer.on_step(s.diagnostics);
    if (observer.on_snapshot && cadence && (k % cadence == 0)) observer.on_snapshot(s);
  }
  res.r_max = r_max;
  const auto m = modulated_rates_at(r_max, config_.params);
  res.ut_pathogenic_at_r_max = homogeneous_equilibria({m.k0B, m.k1B, m.k1B_tilde, config_.params.k12}).ut_pathogenic;
  res.classification = classify_outcome(s.diagnostics.max_ut, res.ut_pathogenic_at_r_max, res.seed_amplitude);
  res.warnings = warnings_;
  res.final_state = std::move(s);
  return res;
}

RunResult run_simulation(const SimulationConfig& config, const RunObserver& observer, Execution exec) {
  Simulation sim(config, exec);
  return sim.run(observer);
}

}  // namespace neuroperf
