#include <benchmark/benchmark.h>

#include "bosonlc/dynamics.hpp"
#include "bosonlc/fock.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"

using namespace bosonlc;

namespace {

FockBasis chain_basis(int sites, int cap) {
  BasisLimits lim;
  lim.num_sites = sites;
  lim.per_site_cap = cap;
  return FockBasis::enumerate(lim);
}

void BM_EnumerateBasis(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(chain_basis(L, 3).size());
  state.counters["states"] = static_cast<double>(chain_basis(L, 3).size());
}
BENCHMARK(BM_EnumerateBasis)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_BuildHamiltonian(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  FockBasis b = chain_basis(L, 3);
  ModelSpec m = bose_hubbard(build_path(L), 1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_hamiltonian(m, b, 0.0).nonZeros());
}
BENCHMARK(BM_BuildHamiltonian)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_Matvec(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  FockBasis b = chain_basis(L, 3);
  SparseOp H = build_hamiltonian(bose_hubbard(build_path(L), 1.0, 1.0), b, 0.0);
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(H.cols()), y(H.rows());
  for (auto _ : state) {
    y.noalias() = H * x;
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * H.nonZeros());
}
BENCHMARK(BM_Matvec)->Arg(7)->Arg(9)->Arg(10);

void BM_EvolveState(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  BasisLimits lim{L, L};
  lim.fixed_total = L;
  FockBasis b = FockBasis::enumerate(lim);
  ModelSpec m = bose_hubbard(build_path(L), 1.0, 1.0);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(b.size());
  std::vector<std::uint8_t> ones(L, 1);
  psi(*b.index_of(ones)) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(evolve_state(psi, m, b, 0.0, 1.0).norm());
  state.counters["states"] = static_cast<double>(b.size());
}
BENCHMARK(BM_EvolveState)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_EvolveOperator(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  FockBasis b = chain_basis(L, 2);
  ModelSpec m = bose_hubbard(build_path(L), 1.0, 1.0);
  OperatorMatrix o = MonomialOp{{0}, {0}, {1}}.matrix(b);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_operator(o, m, 0.5).blocks().size());
}
BENCHMARK(BM_EvolveOperator)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
