#include "nqkv/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <string>
#include <utility>

#include "nqkv/error.hpp"
#include "nqkv/normal.hpp"

namespace nqkv {
namespace {

void check_bits(int bits) {
  require(bits >= 2 && bits <= 8, ErrorKind::kDomain,
          "codebook bits must be in [2, 8], got " + std::to_string(bits));
}

// n points evenly spaced on [from, to], endpoints included.
std::vector<double> linspace(double from, double to, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = to;
  return out;
}

}  // namespace

Codebook::Codebook(CodebookKind kind, int bits, std::vector<float> codepoints)
    : kind_(kind), bits_(bits), codepoints_(std::move(codepoints)) {
  check_bits(bits);
  const std::size_t n = std::size_t{1} << bits;
  require(codepoints_.size() == n, ErrorKind::kConfiguration,
          "codebook needs " + std::to_string(n) + " codepoints");
  require(codepoints_.front() == -1.0f && codepoints_.back() == 1.0f,
          ErrorKind::kConfiguration, "codebook must span exactly [-1, 1]");
  for (std::size_t i = 1; i < n; ++i) {
    require(codepoints_[i - 1] < codepoints_[i], ErrorKind::kConfiguration,
            "codepoints must be strictly increasing");
    max_gap_ = std::max(max_gap_, static_cast<double>(codepoints_[i]) - codepoints_[i - 1]);
  }
  const auto zeros = std::count(codepoints_.begin(), codepoints_.end(), 0.0f);
  if (kind_ == CodebookKind::kNormalFloat) {
    require(zeros == 1, ErrorKind::kConfiguration,
            "NormalFloat codebook must contain exactly one zero");
  }
  small_.fill(std::numeric_limits<double>::infinity());
  if (n <= small_.size()) std::copy(codepoints_.begin(), codepoints_.end(), small_.begin());
  zero_index_ = nearest(0.0);
  id_ = std::string(kind_ == CodebookKind::kNormalFloat ? "nf" : "uniform") +
        std::to_string(bits_);
}

std::uint8_t Codebook::nearest(double x) const noexcept {
  const auto begin = codepoints_.begin();
  const auto end = codepoints_.end();
  auto right = begin;
  if (codepoints_.size() <= 16) {
    std::size_t below = 0;
    for (double c : small_) below += c < x;
    right += static_cast<std::ptrdiff_t>(below);
  } else {
    right = std::lower_bound(begin, end, x, [](float c, double v) { return c < v; });
  }
  if (right == begin) return 0;
  if (right == end) return static_cast<std::uint8_t>(codepoints_.size() - 1);
  const auto left = right - 1;
  const double dist_left = std::fabs(x - static_cast<double>(*left));
  const double dist_right = std::fabs(static_cast<double>(*right) - x);
  const auto idx = static_cast<std::uint8_t>(right - begin);
  return dist_right < dist_left ? idx : static_cast<std::uint8_t>(idx - 1);
}

double nf_offset(int bits) {
  check_bits(bits);
  const double levels = std::ldexp(1.0, bits);
  return 1.0 - 0.5 * (1.0 / (2.0 * levels) + 1.0 / (2.0 * (levels - 1.0)));
}

Codebook build_nf_codebook(int bits) {
  const double offset = nf_offset(bits);
  const std::size_t half = std::size_t{1} << (bits - 1);

  std::vector<double> values;
  values.reserve(2 * half);
  // Negative side: probabilities offset .. 0.5, mirrored; the 0.5 point is the
  // shared zero and is emitted once, from the positive side.
  const auto neg = linspace(offset, 0.5, half);
  for (std::size_t i = 0; i + 1 < neg.size(); ++i) values.push_back(-normal_quantile(neg[i]));
  const auto pos = linspace(0.5, offset, half + 1);
  values.push_back(0.0);
  for (std::size_t i = 1; i < pos.size(); ++i) values.push_back(normal_quantile(pos[i]));

  std::sort(values.begin(), values.end());
  const double max_abs = std::max(std::fabs(values.front()), std::fabs(values.back()));
  std::vector<float> codepoints(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    codepoints[i] = static_cast<float>(values[i] / max_abs);
  }
  // Both ends are +-quantile(offset) / quantile(offset); pin them against
  // rounding in the division.
  codepoints.front() = -1.0f;
  codepoints.back() = 1.0f;
  return Codebook(CodebookKind::kNormalFloat, bits, std::move(codepoints));
}

Codebook build_uniform_codebook(int bits) {
  check_bits(bits);
  const std::size_t n = std::size_t{1} << bits;
  std::vector<float> codepoints(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    codepoints[i] = static_cast<float>((2.0 * static_cast<double>(i) - denom) / denom);
  }
  return Codebook(CodebookKind::kUniform, bits, std::move(codepoints));
}

Codebook build_codebook(CodebookKind kind, int bits) {
  return kind == CodebookKind::kNormalFloat ? build_nf_codebook(bits)
                                            : build_uniform_codebook(bits);
}

Codebook codebook_from_id(const std::string& id) {
  auto parse = [&](std::string_view prefix, CodebookKind kind) -> std::optional<Codebook> {
    if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0) {
      return std::nullopt;
    }
    const std::string digits = id.substr(prefix.size());
    if (digits.size() != 1 || digits[0] < '2' || digits[0] > '8') return std::nullopt;
    return build_codebook(kind, digits[0] - '0');
  };
  if (auto cb = parse("nf", CodebookKind::kNormalFloat)) return *cb;
  if (auto cb = parse("uniform", CodebookKind::kUniform)) return *cb;
  fail(ErrorKind::kConfiguration, "unknown codebook id '" + id + "'");
}

const char* to_string(CodebookKind kind) {
  return kind == CodebookKind::kNormalFloat ? "nf" : "uniform";
}

CodebookKind codebook_kind_from_string(const std::string& name) {
  if (name == "nf" || name == "normalfloat") return CodebookKind::kNormalFloat;
  if (name == "uniform") return CodebookKind::kUniform;
  fail(ErrorKind::kConfiguration, "unknown codebook kind '" + name + "'");
}

}  // namespace nqkv
