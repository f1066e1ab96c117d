#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neuroperf/config.hpp"
#include "neuroperf/errors.hpp"
#include "neuroperf/output.hpp"
#include "neuroperf/parallel.hpp"
#include "neuroperf/stepper.hpp"
#include "neuroperf/verify.hpp"

namespace fs = std::filesystem;
using namespace neuroperf;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3 };

struct Common {
  std::string config;
  bool serial = false;
  int threads = 0;
};

Execution setup(const Common& c) {
  apply_thread_env();
  if (c.threads > 0) set_max_threads(c.threads);
  return c.serial ? Execution::Serial : Execution::Parallel;
}

double range_of(const FieldVector& f, bool want_max) {
  double v = want_max ? -1e300 : 1e300;
  for (std::size_t e = 0; e < f.space().mesh().num_elements(); ++e)
    v = want_max ? std::max(v, f.mean(e)) : std::min(v, f.mean(e));
  return v;
}

int cmd_check(const Common& c) {
  const RunConfig cfg = parse_config(c.config);
  std::printf("ok: %zu steps, %zu seed(s), %zu injur%s\n", cfg.sim.num_steps(), cfg.sim.initial.seeds.size(),
              cfg.sim.injuries.size(), cfg.sim.injuries.size() == 1 ? "y" : "ies");
  return kOk;
}

int cmd_baseline(const Common& c) {
  const RunConfig cfg = parse_config(c.config);
  Simulation sim(cfg.sim, setup(c));
  const auto& hb = sim.baseline();
  const auto& p = hb.pressures;
  std::printf("elements      %zu\n", sim.mesh().num_elements());
  std::printf("p_A [mmHg]    %.4f .. %.4f\n", range_of(p.p_A, false) / kPaPerMmHg, range_of(p.p_A, true) / kPaPerMmHg);
  std::printf("p_C [mmHg]    %.4f .. %.4f\n", range_of(p.p_C, false) / kPaPerMmHg, range_of(p.p_C, true) / kPaPerMmHg);
  std::printf("p_V [mmHg]    %.4f .. %.4f\n", range_of(p.p_V, false) / kPaPerMmHg, range_of(p.p_V, true) / kPaPerMmHg);
  std::printf("min Q_H       %.6e\n", hb.min_Q_H);
  if (cfg.output.vtk) {
    SimulationState s{0, 0.0, FieldVector(sim.protein_space(), FieldRole::U),
                      FieldVector(sim.protein_space(), FieldRole::UTilde), p, {}};
    const fs::path out = cfg.output.dir / "baseline.vtk";
    write_vtk_snapshot(sim, s, out, cfg.output.point_data);
    std::printf("wrote         %s\n", out.string().c_str());
  }
  return kOk;
}

int cmd_run(const Common& c, bool quiet) {
  const RunConfig cfg = parse_config(c.config);
  Simulation sim(cfg.sim, setup(c));
  std::size_t snap = 0;
  RunObserver obs;
  if (cfg.output.vtk) {
    obs.on_snapshot = [&](const SimulationState& s) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%05zu.vtk", snap++);
      write_vtk_snapshot(sim, s, cfg.output.dir / name, cfg.output.point_data);
    };
  }
  if (!quiet) {
    obs.on_step = [](const Diagnostics& d) {
      if (d.step % 100 == 0)
        std::fprintf(stderr, "t = %7.2f yr  max u_tilde = %.4f  max r = %.4f\n", d.time, d.max_ut, d.max_cbf_reduction);
    };
  }
  const RunResult res = sim.run(obs);
  write_timeseries_csv(res.rows, cfg.output.dir / "timeseries.csv");
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto& last = res.rows.back();
  std::printf("classification          %s\n", std::string(to_string(res.classification)).c_str());
  std::printf("final max u_tilde       %.6f\n", last.max_ut);
  std::printf("pathogenic u_tilde      %.6f (at r_max = %.4f)\n", res.ut_pathogenic_at_r_max, res.r_max);
  std::printf("plateau CBF reduction   %.4f\n", last.plateau_cbf_reduction);
  if (res.initial_injury_reduction)
    std::printf("initial injury CBF red. %.4f\n", *res.initial_injury_reduction);
  std::printf("snapshots               %zu\n", snap);
  return kOk;
}

int cmd_convergence(const std::vector<int>& degrees, std::size_t refinements, std::size_t base_n, const Common& c) {
  const auto rows = poisson_convergence_study(degrees, refinements, base_n, setup(c));
  std::printf("degree,n,h,l2_error,order\n");
  for (const auto& r : rows) std::printf("%d,%zu,%.9e,%.9e,%.6f\n", r.degree, r.n, r.h, r.l2_error, r.order);
  return kOk;
}

int cmd_ode(const Common& c, double t_final) {
  const RunConfig cfg = parse_config(c.config);
  const auto& p = cfg.sim.params;
  const KineticRates k = base_rates(p);
  const double u0 = cfg.sim.initial.u0;
  const double ut0 = cfg.sim.initial.seed_amplitude();
  std::printf("dt,max_error_vs_rk4\n");
  const auto ref = ode_oracle(k, u0, ut0, t_final, 1e-4, 0.025);
  for (double dt : {0.2, 0.1, 0.05, 0.025})
    std::printf("%.3f,%.9e\n", dt, max_trajectory_error(implicit_euler_0d(k, u0, ut0, t_final, dt), ref));
  const auto eq = homogeneous_equilibria(k);
  std::printf("\nR0,%.6f\nut_pathogenic,%.6f\n", reproduction_number(k), eq.ut_pathogenic);
  const auto coupled = coupled_0d_oracle(p, u0, ut0, cfg.sim.t_final);
  std::printf("coupled_0d_classification,%s\ncoupled_0d_r_max,%.6f\n",
              std::string(to_string(coupled.classification)).c_str(), coupled.r_max);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discontinuous Galerkin solver for coupled amyloid-beta / perfusion dynamics"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("config", common.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--serial", common.serial, "use the serial reference kernels");
    sub->add_option("--threads", common.threads, "cap on worker threads (overrides NEUROPERF_THREADS)");
  };
  auto* check = app.add_subcommand("check", "validate a configuration file");
  add_common(check, true);
  auto* baseline = app.add_subcommand("baseline", "healthy pressure solve and VTK output");
  add_common(baseline, true);
  auto* run = app.add_subcommand("run", "full simulation");
  add_common(run, true);
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "no progress lines");
  auto* conv = app.add_subcommand("convergence", "manufactured-solution convergence table (CSV)");
  add_common(conv, false);
  std::vector<int> degrees{1, 2};
  std::size_t refinements = 3, base_n = 8;
  conv->add_option("--degrees", degrees, "polynomial degrees")->delimiter(',');
  conv->add_option("--refinements", refinements, "number of meshes");
  conv->add_option("--base-n", base_n, "cells per side of the coarsest mesh");
  auto* ode = app.add_subcommand("ode", "0D oracle comparison (CSV)");
  add_common(ode, true);
  double ode_t = 1.0;
  ode->add_option("--t-final", ode_t, "horizon for the scheme-order table [yr]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(common);
    if (*baseline) return cmd_baseline(common);
    if (*run) return cmd_run(common, quiet);
    if (*conv) return cmd_convergence(degrees, refinements, base_n, common);
    if (*ode) return cmd_ode(common, ode_t);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const InvalidState& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
  return kUsage;
}
