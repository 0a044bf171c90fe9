#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nqkv {

enum class CodebookKind { kNormalFloat, kUniform };

// Sorted table of 2^bits codepoints in [-1, 1]. Quantized data stores indices
// into this table, so a codebook is identified by a stable string id
// ("nf4", "uniform4", ...) that travels with every encoded tensor.
class Codebook {
 public:
  Codebook(CodebookKind kind, int bits, std::vector<float> codepoints);

  CodebookKind kind() const noexcept { return kind_; }
  int bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return codepoints_.size(); }
  std::span<const float> codepoints() const noexcept { return codepoints_; }
  float operator[](std::size_t i) const { return codepoints_[i]; }
  const std::string& id() const noexcept { return id_; }

  // Index of the exact zero codepoint (NormalFloat), or of the codepoint
  // closest to zero with ties to the lower index (uniform).
  std::uint8_t zero_index() const noexcept { return zero_index_; }

  // Largest distance between adjacent codepoints.
  double max_gap() const noexcept { return max_gap_; }

  // Nearest codepoint to x (already divided by the block scale). Ties go to
  // the lower index.
  std::uint8_t nearest(double x) const noexcept;

 private:
  CodebookKind kind_;
  int bits_;
  std::vector<float> codepoints_;
  // Codepoints widened to double and padded with +inf, for tables of <= 16.
  std::array<double, 16> small_{};
  std::string id_;
  std::uint8_t zero_index_ = 0;
  double max_gap_ = 0.0;
};

// NormalFloat codebook for 2 <= bits <= 8. Negative side: 2^(bits-1) quantiles
// from offset down to 0.5; positive side: 2^(bits-1)+1 quantiles from 0.5 up
// to offset; shared zero; normalized by the largest magnitude.
Codebook build_nf_codebook(int bits);

// The offset probability used by build_nf_codebook.
double nf_offset(int bits);

// 2^bits evenly spaced levels in [-1, 1] (2 <= bits <= 8).
Codebook build_uniform_codebook(int bits);

Codebook build_codebook(CodebookKind kind, int bits);

// Resolve an id produced by Codebook::id().
Codebook codebook_from_id(const std::string& id);

const char* to_string(CodebookKind kind);
CodebookKind codebook_kind_from_string(const std::string& name);

}  // namespace nqkv
