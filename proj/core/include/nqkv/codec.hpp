#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nqkv/codebook.hpp"
#include "nqkv/matrix.hpp"

namespace nqkv {

struct QuantizedBlock {
  float scale = 0.0f;  // absmax of the source block
  std::vector<std::uint8_t> indices;

  friend bool operator==(const QuantizedBlock&, const QuantizedBlock&) = default;
};

QuantizedBlock quantize_block(std::span<const float> values, const Codebook& cb);
std::vector<float> dequantize_block(const QuantizedBlock& qb, const Codebook& cb);

// Two 4-bit indices per byte: element 2i in the low nibble of byte i, 2i+1 in
// the high nibble. An odd trailing element leaves `pad` in the high nibble.
std::vector<std::uint8_t> pack_nibbles(std::span<const std::uint8_t> indices,
                                       std::uint8_t pad);
std::vector<std::uint8_t> unpack_nibbles(std::span<const std::uint8_t> packed,
                                         std::size_t count);

// Block-wise quantized l×d matrix. Each row is split into ceil(d/B) blocks
// (the last may be shorter); each block has its own float32 scale. Indices
// are nibble-packed per row, so rows are independent byte ranges.
class QuantizedTensor {
 public:
  QuantizedTensor() = default;
  QuantizedTensor(std::size_t cols, std::size_t block_size, int bits,
                  std::string codebook_id);
  QuantizedTensor(std::size_t rows, std::size_t cols, std::size_t block_size,
                  int bits, std::string codebook_id, std::vector<float> scales,
                  std::vector<std::uint8_t> packed);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t block_size() const noexcept { return block_size_; }
  int bits() const noexcept { return bits_; }
  const std::string& codebook_id() const noexcept { return codebook_id_; }

  std::size_t blocks_per_row() const noexcept {
    return (cols_ + block_size_ - 1) / block_size_;
  }
  std::size_t row_bytes() const noexcept { return (cols_ + 1) / 2; }

  std::span<const float> scales() const noexcept { return scales_; }
  std::span<const std::uint8_t> packed() const noexcept { return packed_; }

  std::span<const float> row_scales(std::size_t r) const;
  std::span<const std::uint8_t> row_packed(std::size_t r) const;
  std::uint8_t index(std::size_t r, std::size_t c) const;

  // Appends the rows of `other`, which must share cols/block_size/bits/codebook.
  // Existing bytes are untouched.
  void append(const QuantizedTensor& other);

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t block_size_ = 1;
  int bits_ = 4;
  std::string codebook_id_;
  std::vector<float> scales_;
  std::vector<std::uint8_t> packed_;
};

QuantizedTensor encode_tensor(const Matrix& m, std::size_t block_size,
                              const Codebook& cb);
Matrix decode_tensor(const QuantizedTensor& qt, const Codebook& cb);

// decode_tensor into rows [0, qt.rows()) of `out`, which must have qt.cols()
// columns and at least qt.rows() rows. Remaining rows are left as they are.
void decode_tensor_into(const QuantizedTensor& qt, const Codebook& cb, Matrix& out);

}  // namespace nqkv
