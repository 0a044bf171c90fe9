#include <benchmark/benchmark.h>

#include <cmath>

#include "nqkv/attention.hpp"
#include "nqkv/kv_cache.hpp"
#include "nqkv/rng.hpp"

namespace {

using namespace nqkv;

constexpr std::size_t kHidden = 256;
constexpr std::size_t kHeads = 4;

AttentionWeights make_weights(Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(kHidden));
  return {rng.normal_matrix(kHidden, kHidden, s), rng.normal_matrix(kHidden, kHidden, s),
          rng.normal_matrix(kHidden, kHidden, s)};
}

// Decode one token against a cache holding range(0) tokens, padded to
// range(1).
void BM_DecodeStep(benchmark::State& state) {
  Rng rng(5);
  const auto w = make_weights(rng);
  const auto prompt = rng.normal_matrix(static_cast<std::size_t>(state.range(0)), kHidden);
  const auto token = rng.normal_matrix(1, kHidden);
  KvCacheConfig config{1, kHidden, kHeads, 64, 4, static_cast<std::size_t>(state.range(1)),
                       CodebookKind::kNormalFloat};
  for (auto _ : state) {
    state.PauseTiming();
    KvCache cache(config);
    prefill(prompt, w, cache, 0);
    state.ResumeTiming();
    benchmark::DoNotOptimize(decode_step(token.row(0), w, cache, 0));
  }
}
BENCHMARK(BM_DecodeStep)->Args({127, 1})->Args({127, 16})->Args({511, 1})->Args({511, 16});

void BM_DecodeStepExact(benchmark::State& state) {
  Rng rng(6);
  const auto w = make_weights(rng);
  const auto prompt = rng.normal_matrix(static_cast<std::size_t>(state.range(0)), kHidden);
  const auto token = rng.normal_matrix(1, kHidden);
  KvCacheConfig config{1, kHidden, kHeads, 64, 4, 16, CodebookKind::kNormalFloat};
  for (auto _ : state) {
    state.PauseTiming();
    ExactKvCache cache(config);
    prefill(prompt, w, cache, 0);
    state.ResumeTiming();
    benchmark::DoNotOptimize(decode_step(token.row(0), w, cache, 0));
  }
}
BENCHMARK(BM_DecodeStepExact)->Arg(127)->Arg(511);

void BM_Materialize(benchmark::State& state) {
  Rng rng(7);
  KvCacheConfig config{1, kHidden, kHeads, 64, 4, 16, CodebookKind::kNormalFloat};
  KvCache cache(config);
  const auto n = static_cast<std::size_t>(state.range(0));
  cache.append_prefill(0, rng.normal_matrix(n, kHidden), rng.normal_matrix(n, kHidden));
  for (auto _ : state) benchmark::DoNotOptimize(cache.materialize(0));
}
BENCHMARK(BM_Materialize)->Arg(128)->Arg(1024);

}  // namespace
