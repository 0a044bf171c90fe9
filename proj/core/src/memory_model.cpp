#include "nqkv/memory_model.hpp"

#include <string>

#include "nqkv/error.hpp"

namespace nqkv {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    fail(ErrorKind::kRange, "memory model overflows 64-bit arithmetic");
  }
  return out;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    fail(ErrorKind::kRange, "memory model overflows 64-bit arithmetic");
  }
  return out;
}

bool float_storage(const ModelSpec& spec) { return spec.kv_bits >= 16; }

}  // namespace

void ModelSpec::validate() const {
  require(num_layers > 0 && hidden_size > 0 && num_params > 0 && weight_bits > 0 &&
              kv_bits > 0 && kv_block_size > 0 && scale_bits > 0,
          ErrorKind::kConfiguration, "model spec '" + name + "' has non-positive fields");
}

double ModelSpec::effective_kv_bits() const {
  if (float_storage(*this)) return static_cast<double>(kv_bits);
  return static_cast<double>(kv_bits) +
         static_cast<double>(scale_bits) / static_cast<double>(kv_block_size);
}

MemoryEstimate kv_memory_model(const ModelSpec& spec, std::uint64_t batch,
                               std::uint64_t seqlen) {
  spec.validate();
  require(batch > 0, ErrorKind::kConfiguration, "batch must be positive");
  require(seqlen > 0, ErrorKind::kConfiguration, "sequence length must be positive");

  // Bits per token per layer for one of K or V.
  std::uint64_t token_bits = mul(spec.hidden_size, spec.kv_bits);
  if (!float_storage(spec)) {
    const std::uint64_t blocks = (spec.hidden_size + spec.kv_block_size - 1) / spec.kv_block_size;
    token_bits = add(token_bits, mul(blocks, spec.scale_bits));
  }
  const std::uint64_t tokens = mul(mul(mul(2, spec.num_layers), batch), seqlen);
  const std::uint64_t kv_bits = mul(tokens, token_bits);
  const std::uint64_t weight_bits = mul(spec.num_params, spec.weight_bits);

  MemoryEstimate est;
  est.kv_bytes = kv_bits / 8 + (kv_bits % 8 != 0 ? 1 : 0);
  est.weight_bytes = weight_bits / 8 + (weight_bits % 8 != 0 ? 1 : 0);
  const double kv = static_cast<double>(est.kv_bytes);
  const double w = static_cast<double>(est.weight_bytes);
  est.kv_fraction = kv / (kv + w);
  est.kv_to_weights = kv / w;
  est.effective_kv_bits = spec.effective_kv_bits();
  return est;
}

ModelSpec opt_175b() {
  ModelSpec s;
  s.name = "OPT-175B";
  s.num_layers = 96;
  s.hidden_size = 12288;
  s.num_params = 175'000'000'000ULL;
  s.weight_bits = 16;
  s.kv_bits = 16;
  s.kv_block_size = 256;
  s.scale_bits = 32;
  return s;
}

}  // namespace nqkv
