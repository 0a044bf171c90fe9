#pragma once

#include <cstdint>
#include <string>

namespace nqkv {

struct ModelSpec {
  std::string name;
  std::uint64_t num_layers = 0;
  std::uint64_t hidden_size = 0;
  std::uint64_t num_params = 0;
  std::uint64_t weight_bits = 16;
  std::uint64_t kv_bits = 16;
  std::uint64_t kv_block_size = 256;
  std::uint64_t scale_bits = 32;

  void validate() const;
  // kv_bits for float storage (>= 16 bits, no block scales), otherwise
  // kv_bits + scale_bits / kv_block_size.
  double effective_kv_bits() const;
};

struct MemoryEstimate {
  std::uint64_t kv_bytes = 0;
  std::uint64_t weight_bytes = 0;
  double kv_fraction = 0.0;     // kv / (kv + weights); activations excluded
  double kv_to_weights = 0.0;
  double effective_kv_bits = 0.0;
};

// Throws ErrorKind::kConfiguration on non-positive inputs and
// ErrorKind::kRange on 64-bit overflow.
MemoryEstimate kv_memory_model(const ModelSpec& spec, std::uint64_t batch,
                               std::uint64_t seqlen);

// OPT-175B at 16-bit weights and KV.
ModelSpec opt_175b();

}  // namespace nqkv
