#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nqkv/codec.hpp"

namespace nqkv {

// ".nqt" layout:
//   "NQKV" | u8 version (1) | u32le header length | UTF-8 JSON header
//   {"bits","block_size","codebook_id","cols","rows"} | f32le scales
//   (row-major block order) | packed nibble bytes (row-major).
inline constexpr std::uint8_t kNqtVersion = 1;

std::vector<std::uint8_t> serialize_nqt(const QuantizedTensor& qt);
QuantizedTensor parse_nqt(std::span<const std::uint8_t> bytes);

void write_nqt(const std::filesystem::path& path, const QuantizedTensor& qt);
QuantizedTensor read_nqt(const std::filesystem::path& path);

// Whole-file helpers shared by the binary formats.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace nqkv
