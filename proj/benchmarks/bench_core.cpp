#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "chronoframe/causality.hpp"
#include "chronoframe/perspective.hpp"

using namespace chronoframe;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix random_hermitian(long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Matrix m(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  }
  return 0.5 * (m + m.adjoint()).eval();
}

}  // namespace

static void BM_kron(benchmark::State& state) {
  const long n = state.range(0);
  Operator a(SpaceLayout({{"A", n}}), random_hermitian(n, 1), true);
  Operator b(SpaceLayout({{"B", n}}), random_hermitian(n, 2), true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kron(a, b));
  }
}
BENCHMARK(BM_kron)->Arg(8)->Arg(16)->Arg(32);

static void BM_partial_trace(benchmark::State& state) {
  const long n = state.range(0);
  Matrix m = random_hermitian(n * n, 3);
  Matrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  Operator op(SpaceLayout({{"A", n}, {"B", n}}), rho, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(partial_trace(op, {"A"}, /*general=*/true));
  }
}
BENCHMARK(BM_partial_trace)->Arg(8)->Arg(16)->Arg(32);

static void BM_eigh(benchmark::State& state) {
  const long n = state.range(0);
  Operator op(SpaceLayout({{"S", n}}), random_hermitian(n, 4), true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigh(op));
  }
}
BENCHMARK(BM_eigh)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_expm(benchmark::State& state) {
  const long n = state.range(0);
  Operator op(SpaceLayout({{"S", n}}), random_hermitian(n, 5), true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(expm_hermitian_generator(op, 0.7));
  }
}
BENCHMARK(BM_expm)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_physical_projector(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"C2", d}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d), build_clock("C2", d, 2 * kPi / d)};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  Operator c = assemble(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(physical_projector(c, 1e-9 * max_abs(c.mat)));
  }
}
BENCHMARK(BM_physical_projector)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_conditional_with_kicks(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const double dt = 2 * kPi / d;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"C2", d}, {"A", 2}, {"B", 2}});
  spec.clocks = {build_clock("C1", d, dt), build_clock("C2", d, dt)};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  spec.system_term = two_qubit_interacting_hamiltonian();
  spec.kick_terms.push_back(
      KickTerm{"C1", InstantaneousKick{d / 4 * dt, 1.0},
               Operator(SpaceLayout({{"A", 2}}), hadamard_kick_generator(), true)});
  spec.kick_terms.push_back(
      KickTerm{"C2", InstantaneousKick{d / 2 * dt, 1.0},
               Operator(SpaceLayout({{"B", 2}}), pauli_kick_generator('z'), true)});

  DelocalizationProfile phi = build_profile(spec.clocks[1], ProfileSpec::gaussian(0.0, 2 * dt));
  Vector kin = Vector::Zero(spec.layout.dim());
  for (int k = 0; k < d; ++k) kin(4L * k) = phi.samples(k);
  StateVector kin_state(spec.layout, kin);

  const double tau = (3 * d / 4) * dt;
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_with_kicks(spec, kin_state, "C1", tau));
  }
}
BENCHMARK(BM_conditional_with_kicks)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_quantum_switch(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const double dt = 2 * kPi / d;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantum_switch_scenario(pauli_x(), pauli_z(), d / 4 * dt, d / 4 * dt,
                                                     ProfileSpec::bimodal(0.0, 4 * dt, dt),
                                                     Matrix::Zero(2, 2), d));
  }
}
BENCHMARK(BM_quantum_switch)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
