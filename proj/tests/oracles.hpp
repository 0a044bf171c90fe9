#pragma once

// Test-only reference implementations. None of these share code paths with
// the library they check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "nqkv/matrix.hpp"

namespace nqkv::oracle {

// Phi via erfc in long double.
inline long double cdf(long double z) { return 0.5L * std::erfc(-z / std::sqrt(2.0L)); }

// Inverse CDF by bisection on [-40, 40]; converges to long double resolution.
inline long double quantile(long double p) {
  long double lo = -40.0L;
  long double hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (cdf(mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5L * (lo + hi);
}

// NormalFloat construction evaluated independently: enumerate the
// probability grid for each side, evaluate quantiles by bisection, sort,
// normalize.
inline std::vector<long double> nf_codebook(int bits) {
  const long double levels = std::ldexp(1.0L, bits);
  const long double offset =
      1.0L - 0.5L * (1.0L / (2.0L * levels) + 1.0L / (2.0L * (levels - 1.0L)));
  const int half = 1 << (bits - 1);
  std::vector<long double> v;
  for (int i = 0; i < half - 1; ++i) {  // negative side, excluding p = 0.5
    const long double p = offset + (0.5L - offset) * i / (half - 1);
    v.push_back(-quantile(p));
  }
  v.push_back(0.0L);
  for (int i = 1; i <= half; ++i) {  // positive side, excluding p = 0.5
    const long double p = 0.5L + (offset - 0.5L) * i / half;
    v.push_back(quantile(p));
  }
  std::vector<long double> sorted = v;
  for (std::size_t i = 1; i < sorted.size(); ++i)  // insertion sort
    for (std::size_t j = i; j > 0 && sorted[j - 1] > sorted[j]; --j) std::swap(sorted[j - 1], sorted[j]);
  long double m = 0.0L;
  for (auto x : sorted) m = std::max(m, std::fabs(x));
  for (auto& x : sorted) x /= m;
  return sorted;
}

// Exhaustive argmin over every codepoint; ties keep the lower index.
inline std::uint8_t nearest(double x, std::span<const float> codepoints) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < codepoints.size(); ++i) {
    const double d = std::fabs(x - static_cast<double>(codepoints[i]));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return static_cast<std::uint8_t>(best);
}

// Unblocked reference: absmax + exhaustive nearest, dequantized directly.
inline std::vector<float> roundtrip_block(std::span<const float> x,
                                          std::span<const float> codepoints) {
  float scale = 0.0f;
  for (float v : x) scale = std::max(scale, std::fabs(v));
  std::vector<float> out(x.size(), 0.0f);
  if (scale == 0.0f) return out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = scale * codepoints[nearest(static_cast<double>(x[i]) / scale, codepoints)];
  }
  return out;
}

// Naive triple loop, i-j-k order.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<float>(s);
    }
  return out;
}

// Causal multi-head attention on unquantized K/V, no padding.
inline Matrix causal_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                               std::size_t heads) {
  const std::size_t d = q.cols();
  const std::size_t hd = d / heads;
  Matrix out(q.rows(), d);
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<long double> logits(i + 1);
      long double mx = -std::numeric_limits<long double>::infinity();
      for (std::size_t j = 0; j <= i; ++j) {
        long double s = 0.0L;
        for (std::size_t c = 0; c < hd; ++c) s += static_cast<long double>(q(i, h * hd + c)) * k(j, h * hd + c);
        logits[j] = s / std::sqrt(static_cast<long double>(hd));
        mx = std::max(mx, logits[j]);
      }
      long double z = 0.0L;
      for (auto& l : logits) z += (l = std::exp(l - mx));
      for (std::size_t c = 0; c < hd; ++c) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j <= i; ++j) acc += logits[j] / z * v(j, h * hd + c);
        out(i, h * hd + c) = static_cast<float>(acc);
      }
    }
  return out;
}

inline double relative_l2(std::span<const float> a, std::span<const float> ref) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - ref[i];
    num += d * d;
    den += static_cast<long double>(ref[i]) * ref[i];
  }
  return static_cast<double>(std::sqrt(num / den));
}

}  // namespace nqkv::oracle
