// Serial reference path against the OpenMP kernels on the desk rectangle.
#include <benchmark/benchmark.h>

#include <memory>

#include "neuroperf/assembly.hpp"
#include "neuroperf/model.hpp"

using namespace neuroperf;

namespace {

struct Fixture {
  std::shared_ptr<const DgSpace> space;
  std::shared_ptr<const FieldVector> ut;
  PhysicalParams params;
  SparseMatrix op;

  explicit Fixture(std::size_t nx) {
    auto mesh = std::make_shared<const Mesh>(generate_rect_mesh(nx, 3 * nx, 0.1, 0.4));
    space = build_space(mesh, 1);
    ut = std::make_shared<const FieldVector>(l2_project(space, [](Point2 x) { return 10.0 * x.x * x.y; }));
    op = assemble_sipg(*space, TensorField::constant(Tensor2::identity()), DirichletData::none()).matrix;
  }

  CoefficientField permeability() const {
    const PhysicalParams p = params;
    return CoefficientField::state([p](Point2, double v) { return capillary_permeability(v, p) * 1e-6; }, ut);
  }
};

const Fixture& fixture(std::size_t nx) {
  static Fixture f30(30), f50(50);
  return nx == 30 ? f30 : f50;
}

Execution mode(const benchmark::State& s) { return s.range(1) ? Execution::Parallel : Execution::Serial; }

void BM_AssembleSipg(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto k = TensorField::isotropic(f.permeability());
  const auto dir = DirichletData::constant({BoundaryTag::Pial}, 9332.54);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_sipg(*f.space, k, dir, kDefaultPenalty, mode(state)));
}

void BM_AssembleMass(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto k = f.permeability();
  for (auto _ : state) benchmark::DoNotOptimize(assemble_mass(*f.space, k, mode(state)));
}

void BM_MatVec(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> y(f.op.rows());
  for (auto _ : state) {
    f.op.multiply(f.ut->coeffs(), y, mode(state));
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_AssembleSipg)->ArgsProduct({{30, 50}, {0, 1}})->ArgNames({"nx", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleMass)->ArgsProduct({{30, 50}, {0, 1}})->ArgNames({"nx", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatVec)->ArgsProduct({{30, 50}, {0, 1}})->ArgNames({"nx", "parallel"})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
