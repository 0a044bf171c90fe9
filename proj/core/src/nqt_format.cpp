#include "nqkv/nqt_format.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "nqkv/error.hpp"
#include "byte_io.hpp"

namespace nqkv {

namespace {
constexpr char kMagic[4] = {'N', 'Q', 'K', 'V'};
}

std::vector<std::uint8_t> serialize_nqt(const QuantizedTensor& qt) {
  const nlohmann::json header = {{"rows", qt.rows()},
                                 {"cols", qt.cols()},
                                 {"block_size", qt.block_size()},
                                 {"bits", qt.bits()},
                                 {"codebook_id", qt.codebook_id()}};
  const std::string text = header.dump();

  detail::ByteWriter out;
  out.bytes(kMagic, sizeof kMagic);
  out.u8(kNqtVersion);
  out.u32(static_cast<std::uint32_t>(text.size()));
  out.bytes(text.data(), text.size());
  for (float s : qt.scales()) out.f32(s);
  out.bytes(qt.packed().data(), qt.packed().size());
  return out.take();
}

QuantizedTensor parse_nqt(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "nqt");
  const auto magic = in.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    in.fail_at(0, "bad magic, expected \"NQKV\"");
  }
  const std::uint8_t version = in.u8();
  if (version != kNqtVersion) {
    in.fail_at(4, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t header_len = in.u32();
  const std::size_t header_offset = in.offset();
  const auto header_bytes = in.bytes(header_len);

  nlohmann::json header;
  std::size_t rows = 0, cols = 0, block_size = 0;
  int bits = 0;
  std::string codebook_id;
  try {
    header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
    rows = header.at("rows").get<std::size_t>();
    cols = header.at("cols").get<std::size_t>();
    block_size = header.at("block_size").get<std::size_t>();
    bits = header.at("bits").get<int>();
    codebook_id = header.at("codebook_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    in.fail_at(header_offset, std::string("malformed header: ") + e.what());
  }
  if (cols == 0 || block_size == 0 || bits < 1 || bits > 4) {
    in.fail_at(header_offset, "header has invalid cols/block_size/bits");
  }

  const std::size_t blocks = (cols + block_size - 1) / block_size;
  const std::size_t scale_count = rows * blocks;
  const std::size_t packed_count = rows * ((cols + 1) / 2);
  const std::size_t expected = scale_count * 4 + packed_count;
  if (in.remaining() != expected) {
    in.fail_at(in.offset(), "payload is " + std::to_string(in.remaining()) +
                                " bytes, header implies " + std::to_string(expected));
  }
  std::vector<float> scales(scale_count);
  for (auto& s : scales) s = in.f32();
  const auto packed = in.bytes(packed_count);
  try {
    return QuantizedTensor(rows, cols, block_size, bits, codebook_id, std::move(scales),
                           std::vector<std::uint8_t>(packed.begin(), packed.end()));
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, std::string("nqt: ") + e.what());
  }
}

void write_nqt(const std::filesystem::path& path, const QuantizedTensor& qt) {
  write_file_bytes(path, serialize_nqt(qt));
}

QuantizedTensor read_nqt(const std::filesystem::path& path) {
  return parse_nqt(read_file_bytes(path));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  require(static_cast<bool>(file), ErrorKind::kFormat,
          "cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(file),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(file), ErrorKind::kFormat,
          "cannot open '" + path.string() + "' for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(file), ErrorKind::kFormat,
          "short write to '" + path.string() + "'");
}

}  // namespace nqkv
