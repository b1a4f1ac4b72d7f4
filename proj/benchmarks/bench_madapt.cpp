// Kernels that dominate a shock-tube step: the Maxwellian solve and its Jacobian, the
// source Jacobian, the DG rate, and full adaptive and complex-only steps.

#include "madapt/config.hpp"
#include "madapt/chem_o2.hpp"
#include "madapt/simulation.hpp"

#include <benchmark/benchmark.h>

using namespace madapt;

namespace {

const o2::O2Hierarchy& gas() {
  static const o2::O2Hierarchy h;
  return h;
}

Vec plateau() { return gas().equilibrium_from_Tpv(2000.0, 2e6, 0.0, 0.01); }

void BM_MaxwellianCold(benchmark::State& st) {
  const Vec u = gas().projection() * plateau();
  for (auto _ : st) benchmark::DoNotOptimize(gas().maxwellian(u));
}
BENCHMARK(BM_MaxwellianCold);

void BM_MaxwellianWarm(benchmark::State& st) {
  const Vec U = plateau();
  Vec u = gas().projection() * U;
  u[3] *= 1.0 + 1e-6;
  for (auto _ : st) benchmark::DoNotOptimize(gas().maxwellian(u, &U));
}
BENCHMARK(BM_MaxwellianWarm);

void BM_MaxwellianJacobian(benchmark::State& st) {
  const Vec u = gas().projection() * plateau();
  const Vec M = gas().maxwellian(u);
  for (auto _ : st) benchmark::DoNotOptimize(gas().maxwellian_jacobian(u, M));
}
BENCHMARK(BM_MaxwellianJacobian);

void BM_FluxJacobian(benchmark::State& st) {
  const Vec U = plateau();
  for (auto _ : st) benchmark::DoNotOptimize(gas().flux_jacobian(U));
}
BENCHMARK(BM_FluxJacobian);

void BM_SourceJacobian(benchmark::State& st) {
  const Vec U = plateau();
  for (auto _ : st) benchmark::DoNotOptimize(gas().source_jacobian(U));
}
BENCHMARK(BM_SourceJacobian);

Simulation shock_tube(int cells, RunMode mode) {
  RunConfig c = literal_shock_tube();
  c.mesh = Mesh1D(-1.0, 1.0, cells, true);
  SimulationOptions opt = c.sim;
  opt.mode = mode;
  opt.adapt.eps_over_nu = 4.5e-12;
  opt.record_slabs = false;
  opt.lazy_indicators = true;
  return Simulation(gas(), c.mesh, initial_data(gas(), c), opt);
}

void BM_DGRate(benchmark::State& st) {
  Simulation sim = shock_tube(static_cast<int>(st.range(0)), RunMode::complex_only);
  DGField r;
  for (auto _ : st) {
    sim.solver().rate(sim.field(), r);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_DGRate)->Arg(320)->Arg(1280);

void BM_Step(benchmark::State& st) {
  const auto mode = static_cast<RunMode>(st.range(1));
  Simulation sim = shock_tube(static_cast<int>(st.range(0)), mode);
  for (int k = 0; k < 50; ++k) sim.step(sim.suggested_dt());  // past the first adaptation
  for (auto _ : st) sim.step(sim.suggested_dt());
  st.SetItemsProcessed(st.iterations() * st.range(0));
  st.SetLabel(to_string(mode));
}
BENCHMARK(BM_Step)
    ->Args({320, static_cast<int>(RunMode::adaptive)})
    ->Args({320, static_cast<int>(RunMode::complex_only)})
    ->Args({1280, static_cast<int>(RunMode::adaptive)})
    ->Args({1280, static_cast<int>(RunMode::complex_only)});

}  // namespace

BENCHMARK_MAIN();
