#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "nqkv/matrix.hpp"

namespace nqkv {

// Raw tensor file: one JSON header line {"cols":d,"rows":l} terminated by
// '\n', then rows*cols little-endian float32 values, row-major.
std::vector<std::uint8_t> serialize_raw_tensor(const Matrix& m);
Matrix parse_raw_tensor(std::span<const std::uint8_t> bytes);

void write_raw_tensor(const std::filesystem::path& path, const Matrix& m);
Matrix ingest_tensor(const std::filesystem::path& path);

}  // namespace nqkv
