#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "neuroperf/assembly.hpp"
#include "neuroperf/dg_space.hpp"
#include "neuroperf/linsolve.hpp"
#include "neuroperf/mesh.hpp"
#include "neuroperf/model.hpp"

namespace neuroperf {

struct MeshSource {
  enum class Kind { Generated, File };
  Kind kind = Kind::Generated;
  std::size_t nx = 50;
  std::size_t ny = 150;
  double lx = 0.1;  // m
  double ly = 0.4;  // m
  std::filesystem::path path;

  Mesh build() const;
  friend bool operator==(const MeshSource&, const MeshSource&) = default;
};

// Local perfusion damage on a subdomain. Absolute overrides replace the base value; the
// permeability scale multiplies k_C. Constriction floors are unchanged.
struct InjurySpec {
  SubdomainSpec region;
  std::optional<double> beta_AC;
  std::optional<double> beta_CV;
  std::optional<double> k_C;
  double k_C_scale = 1.0;
  friend bool operator==(const InjurySpec&, const InjurySpec&) = default;
};

struct SeedSpec {
  SubdomainSpec region;
  double amplitude = 0.0;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// u0 and u_tilde0 are constants except inside seeds, where u_tilde0 takes the seed amplitude.
struct InitialCondition {
  double u0 = 1.0;
  double ut0 = 0.0;
  std::vector<SeedSpec> seeds;

  double ut_at(Point2 x) const;
  double seed_amplitude() const;
  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct SolverOptions {
  enum class Kind { Direct, CG };
  Kind kind = Kind::Direct;
  double tol = 1e-10;
  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

struct SimulationConfig {
  MeshSource mesh;
  int degree_pressure = 1;
  int degree_protein = 1;
  double dt = 0.05;  // yr
  double t_final = 100.0;  // yr
  std::size_t max_steps = 1000000;
  PhysicalParams params;
  std::vector<InjurySpec> injuries;
  std::optional<Point2> perfusion_fibre;
  std::optional<Point2> axon_direction;
  std::vector<BoundaryTag> dirichlet_tags{BoundaryTag::Pial};
  InitialCondition initial;
  double penalty = kDefaultPenalty;
  SolverOptions solver;
  double snapshot_every = 1.0;  // yr; 0 disables snapshots

  // Throws ConfigError naming the offending key.
  void validate() const;
  std::size_t num_steps() const;
  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

// Base perfusion parameters at a point after applying injuries.
struct LocalPerfusion {
  double k_C;
  double beta_AC;
  double beta_CV;
};

struct Pressures {
  FieldVector p_A;
  FieldVector p_C;
  FieldVector p_V;
};

struct HealthyBaseline {
  Pressures pressures;
  // Q_H = (beta_AC / rho)(p_A - p_C) with the injury-free base beta_AC.
  double min_Q_H = 0.0;
};

struct Diagnostics {
  std::size_t step = 0;
  double time = 0.0;
  double mass_u = 0.0;
  double mass_ut = 0.0;
  double max_ut = 0.0;
  double min_ut = 0.0;
  double min_u = 0.0;
  double max_cbf_reduction = 0.0;
  // Mean CBF reduction where u_tilde exceeds half the pathogenic level; 0 if nowhere.
  double plateau_cbf_reduction = 0.0;
  // Measure of the region where u_tilde exceeds half the pathogenic level.
  double invaded_area = 0.0;
  Classification classification = Classification::Indeterminate;
};

struct SimulationState {
  std::size_t step = 0;
  double time = 0.0;
  FieldVector u;
  FieldVector ut;
  Pressures pressures;  // computed from ut at the start of the step that produced this state
  Diagnostics diagnostics;
};

struct RunResult {
  std::vector<Diagnostics> rows;
  Classification classification = Classification::Indeterminate;
  double r_max = 0.0;
  double ut_pathogenic_at_r_max = 0.0;
  double seed_amplitude = 0.0;
  // Mean initial CBF reduction inside the union of injury regions; empty without injuries.
  std::optional<double> initial_injury_reduction;
  std::vector<std::string> warnings;
  std::optional<SimulationState> final_state;
};

struct RunObserver {
  std::function<void(const SimulationState&)> on_snapshot;
  std::function<void(const Diagnostics&)> on_step;
};

// Owns the spaces, constant operators and factorization caches of one run.
class Simulation {
 public:
  explicit Simulation(SimulationConfig config, Execution exec = Execution::Parallel);

  const SimulationConfig& config() const { return config_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const DgSpace>& pressure_space() const { return vp_; }
  const std::shared_ptr<const DgSpace>& protein_space() const { return vu_; }

  LocalPerfusion local_perfusion(Point2 x) const;

  // Solves the three-compartment system with u_tilde = 0 and no injury. Throws InvalidState
  // when Q_H is not positive at every protein quadrature point.
  const HealthyBaseline& baseline();

  // Pressures at the next level from the lagged u_tilde.
  Pressures solve_pressure_block(const FieldVector& ut);

  // One lagged implicit Euler step of the heterodimer system.
  std::pair<FieldVector, FieldVector> step_proteins(const FieldVector& u, const FieldVector& ut,
                                                    const Pressures& p, double dt);

  // Hypoperfusion ratio at a protein-space point given pressures and lagged u_tilde.
  double cbf_reduction_at(const PointContext& ctx, const Pressures& p, const FieldVector& ut) const;
  // Elementwise L2 projection of the CBF reduction onto the protein space.
  FieldVector cbf_reduction_field(const Pressures& p, const FieldVector& ut) const;
  // Mean CBF reduction over the points of `region` (protein quadrature points).
  double mean_cbf_reduction(const SubdomainSpec& region, const Pressures& p, const FieldVector& ut) const;

  SimulationState initial_state();
  Diagnostics diagnose(std::size_t step, double time, const FieldVector& u, const FieldVector& ut,
                       const Pressures& p, double r_max_so_far, double seed) const;

  RunResult run(const RunObserver& observer = {});

  std::vector<std::string>& warnings() { return warnings_; }

 private:
  std::vector<double> solve(DirectSolver& direct, const SparseMatrix& A, std::span<const double> b,
                            std::span<const double> guess, std::size_t block);

  SimulationConfig config_;
  Execution exec_;
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const DgSpace> vp_;
  std::shared_ptr<const DgSpace> vu_;
  AssembledOperator a_A_;
  AssembledOperator a_V_;
  SparseMatrix a_H_;
  SparseMatrix mass_u_;
  std::optional<HealthyBaseline> baseline_;
  DirectSolver pressure_solver_;
  DirectSolver u_solver_;
  DirectSolver ut_solver_;
  std::vector<std::string> warnings_;
};

RunResult run_simulation(const SimulationConfig& config, const RunObserver& observer = {},
                         Execution exec = Execution::Parallel);

}  // namespace neuroperf
