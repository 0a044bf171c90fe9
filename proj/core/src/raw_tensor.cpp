#include "nqkv/raw_tensor.hpp"

#include <algorithm>
#include <string>

#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "nqkv/error.hpp"
#include "nqkv/nqt_format.hpp"

namespace nqkv {

std::vector<std::uint8_t> serialize_raw_tensor(const Matrix& m) {
  const nlohmann::json header = {{"rows", m.rows()}, {"cols", m.cols()}};
  const std::string line = header.dump() + "\n";
  detail::ByteWriter out;
  out.bytes(line.data(), line.size());
  for (float v : m.data()) out.f32(v);
  return out.take();
}

Matrix parse_raw_tensor(std::span<const std::uint8_t> bytes) {
  const auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t{'\n'});
  if (newline == bytes.end()) {
    fail(ErrorKind::kFormat, "raw tensor at byte 0: missing header line");
  }
  std::size_t rows = 0;
  std::size_t cols = 0;
  try {
    const auto header = nlohmann::json::parse(bytes.begin(), newline);
    rows = header.at("rows").get<std::size_t>();
    cols = header.at("cols").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat,
         std::string("raw tensor at byte 0: malformed header: ") + e.what());
  }
  const std::size_t payload_offset = static_cast<std::size_t>(newline - bytes.begin()) + 1;
  const std::size_t expected = rows * cols * 4;
  const std::size_t actual = bytes.size() - payload_offset;
  if (actual != expected) {
    fail(ErrorKind::kFormat, "raw tensor at byte " + std::to_string(payload_offset) +
                                 ": payload is " + std::to_string(actual) +
                                 " bytes, expected " + std::to_string(expected) + " (" +
                                 std::to_string(rows) + "x" + std::to_string(cols) +
                                 " float32)");
  }
  detail::ByteReader in(bytes.subspan(payload_offset), "raw tensor");
  std::vector<float> data(rows * cols);
  for (auto& v : data) v = in.f32();
  return Matrix(rows, cols, std::move(data));
}

void write_raw_tensor(const std::filesystem::path& path, const Matrix& m) {
  write_file_bytes(path, serialize_raw_tensor(m));
}

Matrix ingest_tensor(const std::filesystem::path& path) {
  return parse_raw_tensor(read_file_bytes(path));
}

}  // namespace nqkv
