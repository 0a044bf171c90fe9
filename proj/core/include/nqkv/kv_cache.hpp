#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nqkv/codebook.hpp"
#include "nqkv/codec.hpp"
#include "nqkv/matrix.hpp"

namespace nqkv {

struct KvCacheConfig {
  std::size_t num_layers = 1;
  std::size_t hidden_size = 0;
  std::size_t num_heads = 1;
  std::size_t block_size = 256;
  int bits = 4;
  std::size_t pad_multiple = 16;
  CodebookKind codec = CodebookKind::kNormalFloat;

  std::size_t head_dim() const noexcept {
    return num_heads == 0 ? 0 : hidden_size / num_heads;
  }
  // Throws ErrorKind::kConfiguration.
  void validate() const;

  friend bool operator==(const KvCacheConfig&, const KvCacheConfig&) = default;
};

// Dequantized working copy handed to attention. Rows past valid_len are zero.
struct MaterializedKv {
  Matrix keys;
  Matrix values;
  std::size_t valid_len = 0;
};

// Smallest multiple of `multiple` that is >= n.
std::size_t padded_length(std::size_t n, std::size_t multiple);

struct LayerCache {
  QuantizedTensor keys;
  QuantizedTensor values;

  std::size_t token_count() const noexcept { return keys.rows(); }
  friend bool operator==(const LayerCache&, const LayerCache&) = default;
};

// Append-only per-layer store of block-quantized keys and values. Tokens are
// quantized over the full hidden vector; heads are split only after
// dequantization. Single writer per layer.
class KvCache {
 public:
  explicit KvCache(const KvCacheConfig& config);

  const KvCacheConfig& config() const noexcept { return config_; }
  const Codebook& codebook() const noexcept { return codebook_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  const LayerCache& layer(std::size_t i) const;
  std::size_t token_count(std::size_t layer) const;

  void append_prefill(std::size_t layer, const Matrix& keys, const Matrix& values);
  void append_token(std::size_t layer, std::span<const float> key,
                    std::span<const float> value);

  // Dequantizes the layer and zero-pads to a multiple of pad_multiple. The
  // store itself is never padded.
  MaterializedKv materialize(std::size_t layer) const;

  // Exact stored bytes (indices + scales) over all layers.
  std::size_t memory_bytes() const;

  // Container: "NQKC" | u8 version | u32le config JSON length | config JSON |
  // per layer: u64le length + keys .nqt, u64le length + values .nqt.
  std::vector<std::uint8_t> snapshot() const;
  static KvCache restore(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static KvCache load(const std::filesystem::path& path);

 private:
  void check_layer(std::size_t layer) const;

  KvCacheConfig config_;
  Codebook codebook_;
  std::vector<LayerCache> layers_;
};

// Unquantized float32 store with the KvCache append/materialize surface, used
// as the exact reference path.
class ExactKvCache {
 public:
  explicit ExactKvCache(const KvCacheConfig& config);

  const KvCacheConfig& config() const noexcept { return config_; }
  std::size_t num_layers() const noexcept { return keys_.size(); }
  std::size_t token_count(std::size_t layer) const;

  void append_prefill(std::size_t layer, const Matrix& keys, const Matrix& values);
  void append_token(std::size_t layer, std::span<const float> key,
                    std::span<const float> value);
  MaterializedKv materialize(std::size_t layer) const;
  std::size_t memory_bytes() const;

 private:
  void check_layer(std::size_t layer) const;

  KvCacheConfig config_;
  std::vector<std::vector<float>> keys_;
  std::vector<std::vector<float>> values_;
};

}  // namespace nqkv
