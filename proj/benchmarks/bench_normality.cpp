#include <benchmark/benchmark.h>

#include "nqkv/normality.hpp"
#include "nqkv/rng.hpp"

namespace {

using namespace nqkv;

void BM_DapTest(benchmark::State& state) {
  Rng rng(8);
  std::vector<double> sample(static_cast<std::size_t>(state.range(0)));
  for (double& v : sample) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(dap_test(sample, 0.05));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DapTest)->Arg(256)->Arg(4096);

void BM_BlockReport(benchmark::State& state) {
  Rng rng(9);
  const auto token = rng.normal_matrix(1, 4096);
  for (auto _ : state) benchmark::DoNotOptimize(block_normality_report(token, 256, 0.05));
}
BENCHMARK(BM_BlockReport);

}  // namespace
