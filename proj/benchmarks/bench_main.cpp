#include <benchmark/benchmark.h>

#include "superatom/ion_escape.hpp"
#include "superatom/protocol.hpp"

using namespace superatom;

namespace {

LaserParams weak_probe() { return LaserParams::from_mhz(0.7, 10, 5.0, -5.0); }

ProtocolConfig targeted(int n, double omega_c_mhz) {
  ProtocolConfig cfg;
  cfg.spec = EnsembleSpec(n);
  cfg.omega_c = angular_from_mhz(omega_c_mhz);
  cfg.delta_c = -0.5 * cfg.omega_c;
  cfg.effective_rabi_target = angular_from_mhz(0.1);
  cfg.samples = 2;
  return cfg;
}

void BM_DickeHamiltonian(benchmark::State& state) {
  const EnsembleSpec spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_dicke_hamiltonian(weak_probe(), spec));
}
BENCHMARK(BM_DickeHamiltonian)->Arg(10)->Arg(50)->Arg(100);

void BM_ProductHamiltonian(benchmark::State& state) {
  const ProductBasis basis{EnsembleSpec(static_cast<int>(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(build_product_hamiltonian(weak_probe(), basis));
}
BENCHMARK(BM_ProductHamiltonian)->Arg(4)->Arg(6);

void BM_SpectralPropagation(benchmark::State& state) {
  const EnsembleSpec spec(static_cast<int>(state.range(0)));
  const RealMatrix h = build_dicke_hamiltonian(weak_probe(), spec);
  ComplexVector psi0 = ComplexVector::Zero(h.rows());
  psi0[0] = 1;
  for (auto _ : state) {
    const SpectralPropagator prop(h);
    benchmark::DoNotOptimize(prop.evolve(psi0, 3.6));
  }
}
BENCHMARK(BM_SpectralPropagation)->Arg(10)->Arg(50)->Arg(100);

void BM_DickeProtocol(benchmark::State& state) {
  const ProtocolConfig cfg = targeted(static_cast<int>(state.range(0)), 100);
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(cfg, Model::dicke));
}
BENCHMARK(BM_DickeProtocol)->Arg(3)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_LindbladPulse(benchmark::State& state) {
  ProtocolConfig cfg = targeted(static_cast<int>(state.range(0)), 10);
  cfg.rates.gamma_e = angular_from_mhz(0.001);
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(cfg, Model::lindblad));
}
BENCHMARK(BM_LindbladPulse)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_IonTrajectory(benchmark::State& state) {
  IonEscapeConfig cfg;
  cfg.differential_polarizability = kSr88ClockDeltaAlpha;
  cfg.n_atoms = static_cast<int>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trajectory(cfg, i++));
}
BENCHMARK(BM_IonTrajectory)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
