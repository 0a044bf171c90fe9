#include "nqkv/kv_cache.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "nqkv/error.hpp"
#include "nqkv/nqt_format.hpp"

namespace nqkv {

namespace {

constexpr char kSnapshotMagic[4] = {'N', 'Q', 'K', 'C'};
constexpr std::uint8_t kSnapshotVersion = 1;

nlohmann::json config_to_json(const KvCacheConfig& c) {
  return {{"num_layers", c.num_layers}, {"hidden_size", c.hidden_size},
          {"num_heads", c.num_heads},   {"block_size", c.block_size},
          {"bits", c.bits},             {"pad_multiple", c.pad_multiple},
          {"codec", to_string(c.codec)}};
}

KvCacheConfig config_from_json(const nlohmann::json& j) {
  KvCacheConfig c;
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.block_size = j.at("block_size").get<std::size_t>();
  c.bits = j.at("bits").get<int>();
  c.pad_multiple = j.at("pad_multiple").get<std::size_t>();
  c.codec = codebook_kind_from_string(j.at("codec").get<std::string>());
  return c;
}

void check_width(std::size_t got, std::size_t want, const char* what) {
  require(got == want, ErrorKind::kShape,
          std::string(what) + " has width " + std::to_string(got) + ", cache expects " +
              std::to_string(want));
}

}  // namespace

void KvCacheConfig::validate() const {
  require(num_layers > 0 && hidden_size > 0 && num_heads > 0 && block_size > 0 &&
              pad_multiple > 0 && bits > 0,
          ErrorKind::kConfiguration, "cache config fields must be positive");
  require(hidden_size % num_heads == 0, ErrorKind::kConfiguration,
          "hidden size " + std::to_string(hidden_size) + " not divisible by " +
              std::to_string(num_heads) + " heads");
  require(bits <= 4, ErrorKind::kConfiguration, "cache stores at most 4-bit indices");
}

std::size_t padded_length(std::size_t n, std::size_t multiple) {
  return (n + multiple - 1) / multiple * multiple;
}

// ---------------------------------------------------------------------------
// KvCache

KvCache::KvCache(const KvCacheConfig& config)
    : config_((config.validate(), config)),
      codebook_(build_codebook(config.codec, config.bits)) {
  layers_.reserve(config_.num_layers);
  for (std::size_t i = 0; i < config_.num_layers; ++i) {
    QuantizedTensor empty(config_.hidden_size, config_.block_size, config_.bits,
                          codebook_.id());
    layers_.push_back(LayerCache{empty, empty});
  }
}

void KvCache::check_layer(std::size_t layer) const {
  require(layer < layers_.size(), ErrorKind::kShape,
          "layer " + std::to_string(layer) + " out of range (" +
              std::to_string(layers_.size()) + " layers)");
}

const LayerCache& KvCache::layer(std::size_t i) const {
  check_layer(i);
  return layers_[i];
}

std::size_t KvCache::token_count(std::size_t layer) const {
  check_layer(layer);
  return layers_[layer].token_count();
}

void KvCache::append_prefill(std::size_t layer, const Matrix& keys, const Matrix& values) {
  check_layer(layer);
  require(keys.rows() == values.rows() && keys.cols() == values.cols(), ErrorKind::kShape,
          "keys and values must have the same shape");
  require(keys.rows() >= 1, ErrorKind::kShape, "prefill needs at least one token");
  check_width(keys.cols(), config_.hidden_size, "keys");
  // Encode both before touching the store so a failure leaves it unchanged.
  auto qk = encode_tensor(keys, config_.block_size, codebook_);
  auto qv = encode_tensor(values, config_.block_size, codebook_);
  layers_[layer].keys.append(qk);
  layers_[layer].values.append(qv);
}

void KvCache::append_token(std::size_t layer, std::span<const float> key,
                           std::span<const float> value) {
  check_width(key.size(), config_.hidden_size, "key");
  check_width(value.size(), config_.hidden_size, "value");
  append_prefill(layer,
                 Matrix(1, key.size(), std::vector<float>(key.begin(), key.end())),
                 Matrix(1, value.size(), std::vector<float>(value.begin(), value.end())));
}

MaterializedKv KvCache::materialize(std::size_t layer) const {
  check_layer(layer);
  const auto& lc = layers_[layer];
  require(lc.token_count() >= 1, ErrorKind::kState,
          "cannot materialize empty layer " + std::to_string(layer));
  const std::size_t padded = padded_length(lc.token_count(), config_.pad_multiple);
  MaterializedKv out{Matrix(padded, config_.hidden_size),
                     Matrix(padded, config_.hidden_size), lc.token_count()};
  decode_tensor_into(lc.keys, codebook_, out.keys);
  decode_tensor_into(lc.values, codebook_, out.values);
  return out;
}

std::size_t KvCache::memory_bytes() const {
  std::size_t total = 0;
  for (const auto& lc : layers_) {
    total += lc.keys.scales().size() * sizeof(float) + lc.keys.packed().size();
    total += lc.values.scales().size() * sizeof(float) + lc.values.packed().size();
  }
  return total;
}

std::vector<std::uint8_t> KvCache::snapshot() const {
  detail::ByteWriter out;
  out.bytes(kSnapshotMagic, sizeof kSnapshotMagic);
  out.u8(kSnapshotVersion);
  const std::string text = config_to_json(config_).dump();
  out.u32(static_cast<std::uint32_t>(text.size()));
  out.bytes(text.data(), text.size());
  for (const auto& lc : layers_) {
    for (const auto* t : {&lc.keys, &lc.values}) {
      const auto payload = serialize_nqt(*t);
      out.u64(payload.size());
      out.bytes(payload.data(), payload.size());
    }
  }
  return out.take();
}

KvCache KvCache::restore(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "cache snapshot");
  const auto magic = in.bytes(4);
  if (std::memcmp(magic.data(), kSnapshotMagic, 4) != 0) {
    in.fail_at(0, "bad magic, expected \"NQKC\"");
  }
  const auto version = in.u8();
  if (version != kSnapshotVersion) {
    in.fail_at(4, "unsupported version " + std::to_string(version));
  }
  const auto len = in.u32();
  const std::size_t config_offset = in.offset();
  const auto text = in.bytes(len);
  KvCacheConfig config;
  try {
    config = config_from_json(nlohmann::json::parse(text.begin(), text.end()));
  } catch (const nlohmann::json::exception& e) {
    in.fail_at(config_offset, std::string("malformed config: ") + e.what());
  }
  KvCache cache(config);
  for (auto& lc : cache.layers_) {
    for (auto* t : {&lc.keys, &lc.values}) {
      const auto size = in.u64();
      const std::size_t at = in.offset();
      auto qt = parse_nqt(in.bytes(size));
      if (qt.cols() != config.hidden_size || qt.block_size() != config.block_size ||
          qt.codebook_id() != cache.codebook_.id()) {
        in.fail_at(at, "layer tensor does not match cache config");
      }
      *t = std::move(qt);
    }
    if (lc.keys.rows() != lc.values.rows()) {
      in.fail_at(in.offset(), "keys and values disagree on token count");
    }
  }
  if (in.remaining() != 0) in.fail_at(in.offset(), "trailing bytes");
  return cache;
}

void KvCache::save(const std::filesystem::path& path) const {
  write_file_bytes(path, snapshot());
}

KvCache KvCache::load(const std::filesystem::path& path) {
  return restore(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// ExactKvCache

ExactKvCache::ExactKvCache(const KvCacheConfig& config)
    : config_((config.validate(), config)),
      keys_(config.num_layers),
      values_(config.num_layers) {}

void ExactKvCache::check_layer(std::size_t layer) const {
  require(layer < keys_.size(), ErrorKind::kShape,
          "layer " + std::to_string(layer) + " out of range");
}

std::size_t ExactKvCache::token_count(std::size_t layer) const {
  check_layer(layer);
  return keys_[layer].size() / config_.hidden_size;
}

void ExactKvCache::append_prefill(std::size_t layer, const Matrix& keys,
                                  const Matrix& values) {
  check_layer(layer);
  require(keys.rows() == values.rows() && keys.cols() == values.cols(), ErrorKind::kShape,
          "keys and values must have the same shape");
  check_width(keys.cols(), config_.hidden_size, "keys");
  keys_[layer].insert(keys_[layer].end(), keys.data().begin(), keys.data().end());
  values_[layer].insert(values_[layer].end(), values.data().begin(), values.data().end());
}

void ExactKvCache::append_token(std::size_t layer, std::span<const float> key,
                                std::span<const float> value) {
  check_layer(layer);
  check_width(key.size(), config_.hidden_size, "key");
  check_width(value.size(), config_.hidden_size, "value");
  keys_[layer].insert(keys_[layer].end(), key.begin(), key.end());
  values_[layer].insert(values_[layer].end(), value.begin(), value.end());
}

MaterializedKv ExactKvCache::materialize(std::size_t layer) const {
  const std::size_t n = token_count(layer);
  require(n >= 1, ErrorKind::kState, "cannot materialize empty layer " + std::to_string(layer));
  const std::size_t padded = padded_length(n, config_.pad_multiple);
  MaterializedKv out{Matrix(padded, config_.hidden_size),
                     Matrix(padded, config_.hidden_size), n};
  std::copy(keys_[layer].begin(), keys_[layer].end(), out.keys.data().begin());
  std::copy(values_[layer].begin(), values_[layer].end(), out.values.data().begin());
  return out;
}

std::size_t ExactKvCache::memory_bytes() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    total += (keys_[i].size() + values_[i].size()) * sizeof(float);
  }
  return total;
}

}  // namespace nqkv
