#include <random>

#include <benchmark/benchmark.h>

#include "treeqcqp/case_io.hpp"
#include "treeqcqp/heuristic.hpp"
#include "treeqcqp/relaxation.hpp"

using namespace treeqcqp;

namespace {

HermitianMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return HermitianMatrix(CMatrix(m + m.adjoint()));
}

void BM_EigHermitian(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const HermitianMatrix h = random_hermitian(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(eig_hermitian(h));
}
BENCHMARK(BM_EigHermitian)->Arg(4)->Arg(16)->Arg(50);

void BM_OriginInRelint(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<Complex> pts;
  for (int k = 0; k < state.range(0); ++k) pts.emplace_back(nd(rng), nd(rng));
  for (auto _ : state) benchmark::DoNotOptimize(origin_in_relint(pts));
}
BENCHMARK(BM_OriginInRelint)->Arg(3)->Arg(8)->Arg(32);

void BM_ProjectL1Ball(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  RVector v(state.range(0));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = nd(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_l1_ball(v, 1.0));
}
BENCHMARK(BM_ProjectL1Ball)->Arg(100)->Arg(10000);

void BM_OpfRelaxation(benchmark::State& state) {
  RandomCircuitParams rp;
  rp.n = static_cast<int>(state.range(0));
  rp.seed = 1;
  const SdpData data = build_relaxation(assemble_opf(gen_random_radial(rp), ObjectiveSpec{}));
  for (auto _ : state) benchmark::DoNotOptimize(solve_sdp(data));
}
BENCHMARK(BM_OpfRelaxation)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
