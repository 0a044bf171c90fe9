#include <benchmark/benchmark.h>

#include "nqkv/codebook.hpp"
#include "nqkv/codec.hpp"
#include "nqkv/nqt_format.hpp"
#include "nqkv/rng.hpp"

namespace {

using namespace nqkv;

void BM_QuantizeBlock(benchmark::State& state) {
  const auto cb = build_nf_codebook(4);
  Rng rng(1);
  std::vector<float> block(static_cast<std::size_t>(state.range(0)));
  for (float& v : block) v = static_cast<float>(rng.normal());
  for (auto _ : state) benchmark::DoNotOptimize(quantize_block(block, cb));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuantizeBlock)->Arg(64)->Arg(256)->Arg(1024);

void BM_EncodeTensor(benchmark::State& state) {
  const auto cb = build_nf_codebook(4);
  Rng rng(2);
  const auto m = rng.normal_matrix(static_cast<std::size_t>(state.range(0)), 4096);
  for (auto _ : state) benchmark::DoNotOptimize(encode_tensor(m, 256, cb));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 4096);
}
BENCHMARK(BM_EncodeTensor)->Arg(1)->Arg(64);

void BM_DecodeTensor(benchmark::State& state) {
  const auto cb = build_nf_codebook(4);
  Rng rng(3);
  const auto qt = encode_tensor(rng.normal_matrix(static_cast<std::size_t>(state.range(0)), 4096),
                                256, cb);
  Matrix out(qt.rows(), qt.cols());
  for (auto _ : state) {
    decode_tensor_into(qt, cb, out);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 4096);
}
BENCHMARK(BM_DecodeTensor)->Arg(1)->Arg(64);

void BM_SerializeNqt(benchmark::State& state) {
  const auto cb = build_nf_codebook(4);
  Rng rng(4);
  const auto qt = encode_tensor(rng.normal_matrix(64, 4096), 256, cb);
  for (auto _ : state) benchmark::DoNotOptimize(parse_nqt(serialize_nqt(qt)));
}
BENCHMARK(BM_SerializeNqt);

}  // namespace
