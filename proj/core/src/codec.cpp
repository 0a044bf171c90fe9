#include "nqkv/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "nqkv/error.hpp"

namespace nqkv {

QuantizedBlock quantize_block(std::span<const float> values, const Codebook& cb) {
  require(!values.empty(), ErrorKind::kDomain, "cannot quantize an empty block");
  float scale = 0.0f;
  for (float v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::kData, "non-finite value in block");
    scale = std::max(scale, std::fabs(v));
  }
  QuantizedBlock qb;
  qb.scale = scale;
  if (scale == 0.0f) {
    qb.indices.assign(values.size(), cb.zero_index());
    return qb;
  }
  qb.indices.resize(values.size());
  const double ref = static_cast<double>(scale);
  for (std::size_t i = 0; i < values.size(); ++i) {
    qb.indices[i] = cb.nearest(static_cast<double>(values[i]) / ref);
  }
  return qb;
}

std::vector<float> dequantize_block(const QuantizedBlock& qb, const Codebook& cb) {
  std::vector<float> out(qb.indices.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto idx = qb.indices[i];
    if (idx >= cb.size()) {
      fail(ErrorKind::kCorruption, "codepoint index " + std::to_string(idx) + " out of range");
    }
    out[i] = qb.scale * cb[idx];
  }
  return out;
}

std::vector<std::uint8_t> pack_nibbles(std::span<const std::uint8_t> indices,
                                       std::uint8_t pad) {
  std::vector<std::uint8_t> packed((indices.size() + 1) / 2);
  for (std::size_t i = 0; i < packed.size(); ++i) {
    const std::uint8_t lo = indices[2 * i] & 0x0F;
    const std::uint8_t hi = (2 * i + 1 < indices.size() ? indices[2 * i + 1] : pad) & 0x0F;
    packed[i] = static_cast<std::uint8_t>(lo | (hi << 4));
  }
  return packed;
}

std::vector<std::uint8_t> unpack_nibbles(std::span<const std::uint8_t> packed,
                                         std::size_t count) {
  require(count <= 2 * packed.size(), ErrorKind::kCorruption,
          "too few packed bytes for " + std::to_string(count) + " indices");
  std::vector<std::uint8_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t byte = packed[i / 2];
    out[i] = (i % 2 == 0) ? (byte & 0x0F) : (byte >> 4);
  }
  return out;
}

QuantizedTensor::QuantizedTensor(std::size_t cols, std::size_t block_size, int bits,
                                 std::string codebook_id)
    : cols_(cols), block_size_(block_size), bits_(bits),
      codebook_id_(std::move(codebook_id)) {
  require(cols_ >= 1 && block_size_ >= 1, ErrorKind::kConfiguration,
          "quantized tensor needs cols >= 1 and block_size >= 1");
  require(bits_ >= 1 && bits_ <= 4, ErrorKind::kConfiguration,
          "nibble-packed tensors hold at most 4-bit indices");
}

QuantizedTensor::QuantizedTensor(std::size_t rows, std::size_t cols,
                                 std::size_t block_size, int bits,
                                 std::string codebook_id, std::vector<float> scales,
                                 std::vector<std::uint8_t> packed)
    : QuantizedTensor(cols, block_size, bits, std::move(codebook_id)) {
  rows_ = rows;
  scales_ = std::move(scales);
  packed_ = std::move(packed);
  require(scales_.size() == rows_ * blocks_per_row(), ErrorKind::kCorruption,
          "expected " + std::to_string(rows_ * blocks_per_row()) + " scales, got " +
              std::to_string(scales_.size()));
  require(packed_.size() == rows_ * row_bytes(), ErrorKind::kCorruption,
          "expected " + std::to_string(rows_ * row_bytes()) + " packed bytes, got " +
              std::to_string(packed_.size()));
  for (float s : scales_) {
    if (!(std::isfinite(s) && s >= 0.0f)) {
      fail(ErrorKind::kCorruption, "scales must be finite and non-negative");
    }
  }
}

std::span<const float> QuantizedTensor::row_scales(std::size_t r) const {
  return std::span<const float>(scales_).subspan(r * blocks_per_row(), blocks_per_row());
}

std::span<const std::uint8_t> QuantizedTensor::row_packed(std::size_t r) const {
  return std::span<const std::uint8_t>(packed_).subspan(r * row_bytes(), row_bytes());
}

std::uint8_t QuantizedTensor::index(std::size_t r, std::size_t c) const {
  const std::uint8_t byte = packed_[r * row_bytes() + c / 2];
  return (c % 2 == 0) ? (byte & 0x0F) : (byte >> 4);
}

void QuantizedTensor::append(const QuantizedTensor& other) {
  require(other.cols_ == cols_ && other.block_size_ == block_size_ &&
              other.bits_ == bits_ && other.codebook_id_ == codebook_id_,
          ErrorKind::kShape, "appended rows must share the tensor layout");
  scales_.insert(scales_.end(), other.scales_.begin(), other.scales_.end());
  packed_.insert(packed_.end(), other.packed_.begin(), other.packed_.end());
  rows_ += other.rows_;
}

QuantizedTensor encode_tensor(const Matrix& m, std::size_t block_size,
                              const Codebook& cb) {
  require(m.rows() >= 1 && m.cols() >= 1, ErrorKind::kShape, "cannot encode an empty matrix");
  require(block_size >= 1, ErrorKind::kConfiguration, "block size must be >= 1");
  require(cb.bits() <= 4, ErrorKind::kConfiguration,
          "tensor encoding packs 4-bit indices; codebook has " +
              std::to_string(cb.bits()) + " bits");

  const std::size_t d = m.cols();
  const std::size_t blocks = (d + block_size - 1) / block_size;
  std::vector<float> scales;
  scales.reserve(m.rows() * blocks);
  std::vector<std::uint8_t> packed;
  packed.reserve(m.rows() * ((d + 1) / 2));
  std::vector<std::uint8_t> row_indices(d);

  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t begin = b * block_size;
      const std::size_t len = std::min(block_size, d - begin);
      const auto qb = quantize_block(row.subspan(begin, len), cb);
      scales.push_back(qb.scale);
      std::copy(qb.indices.begin(), qb.indices.end(), row_indices.begin() + begin);
    }
    const auto row_bytes = pack_nibbles(row_indices, cb.zero_index());
    packed.insert(packed.end(), row_bytes.begin(), row_bytes.end());
  }
  return QuantizedTensor(m.rows(), d, block_size, cb.bits(), cb.id(), std::move(scales),
                         std::move(packed));
}

void decode_tensor_into(const QuantizedTensor& qt, const Codebook& cb, Matrix& out) {
  require(qt.codebook_id() == cb.id(), ErrorKind::kConfiguration,
          "tensor was encoded with '" + qt.codebook_id() + "', decoding with '" +
              cb.id() + "'");
  require(out.cols() == qt.cols() && out.rows() >= qt.rows(), ErrorKind::kShape,
          "decode target too small");
  const auto codepoints = cb.codepoints();
  const std::size_t bs = qt.block_size();
  for (std::size_t r = 0; r < qt.rows(); ++r) {
    const auto scales = qt.row_scales(r);
    const auto packed = qt.row_packed(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < qt.cols(); ++c) {
      const std::uint8_t byte = packed[c / 2];
      const std::uint8_t idx = (c % 2 == 0) ? (byte & 0x0F) : (byte >> 4);
      if (idx >= codepoints.size()) {
        fail(ErrorKind::kCorruption, "codepoint index " + std::to_string(idx) + " out of range");
      }
      dst[c] = scales[c / bs] * codepoints[idx];
    }
  }
}

Matrix decode_tensor(const QuantizedTensor& qt, const Codebook& cb) {
  Matrix out(qt.rows(), qt.cols());
  decode_tensor_into(qt, cb, out);
  return out;
}

}  // namespace nqkv
