#pragma once

// Little-endian byte cursor helpers shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "nqkv/error.hpp"

namespace nqkv::detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  [[noreturn]] void fail_at(std::size_t offset, const std::string& msg) const {
    fail(ErrorKind::kFormat, what_ + " at byte " + std::to_string(offset) + ": " + msg);
  }

  std::span<const std::uint8_t> bytes(std::size_t n) {
    if (remaining() < n) {
      fail_at(pos_, "truncated, need " + std::to_string(n) + " bytes, have " +
                        std::to_string(remaining()));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return bytes(1)[0]; }
  std::uint32_t u32() {
    const auto b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::span<const std::uint8_t> data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace nqkv::detail
