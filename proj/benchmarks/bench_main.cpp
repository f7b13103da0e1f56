#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "fieldcable/scenario.hpp"

using namespace fieldcable;

namespace {

// Straight tube in the unit cube on an n^3 grid.
Scenario tube(int n) {
  Scenario sc;
  sc.geometry.cables.push_back(CableCurve::segment(Vec3(0.5, 0.5, 0.25), Vec3(0.5, 0.5, 0.75), 0.25));
  sc.cells = {n, n, n};
  sc.n_theta = 16;
  sc.line_cells = 16;
  const MatC one = MatC::Identity(1, 1);
  sc.line = LineMaterials::uniform(one, one, 0.1 * one, 0.05 * one);
  sc.sigma = Vec3::Constant(0.05);
  MatC wb(2, 4);
  wb << 1, 0, 1, 0, 0, 1, 0, 1;
  sc.boundary = BoundaryConditionSpec::from_W_B(wb, 2);
  return sc;
}

VecC random_state(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  VecC x(n);
  for (int i = 0; i < n; ++i) x(i) = cplx(nd(rng), 0.0);
  return x;
}

void BM_Assemble(benchmark::State& state) {
  const Scenario sc = tube(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto model = build_model(sc);
    benchmark::DoNotOptimize(model->bundle.J.nonZeros());
  }
}

void BM_ApplyJ(benchmark::State& state) {
  const auto model = build_model(tube(static_cast<int>(state.range(0))));
  const OperatorBundle& b = model->bundle;
  const VecC e = random_state(b.size());
  VecC out(b.size());
  for (auto _ : state) {
    out.noalias() = b.J * e;
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["N"] = b.size();
}

void BM_MidpointStep(benchmark::State& state) {
  const auto model = build_model(tube(static_cast<int>(state.range(0))));
  const SystemNode node(model->bundle, model->scenario.boundary);
  const MidpointStepper st(node, 0.01);
  VecC x = random_state(model->bundle.size()), next;
  const VecC u = VecC::Zero(2);
  for (auto _ : state) {
    st.step(x, u, next);
    x.swap(next);
  }
  state.counters["N"] = model->bundle.size();
}

}  // namespace

BENCHMARK(BM_Assemble)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyJ)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MidpointStep)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
