#include "nqkv/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nqkv/error.hpp"

namespace nqkv {

namespace {

void check_square(const Matrix& m, std::size_t d, const char* name) {
  require(m.rows() == d && m.cols() == d, ErrorKind::kShape,
          std::string(name) + " must be " + std::to_string(d) + "x" + std::to_string(d));
  for (float v : m.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kData, std::string(name) + " has non-finite entries");
  }
}

// Attention of one query row over the first `valid_len` rows of kv.keys /
// kv.values. Every row of the working copy is visited in order; rows past
// valid_len get -inf logits and therefore exactly zero weight, so the result
// does not depend on how far the copy is padded.
DecodeOutput attend_prefix(std::span<const float> query, const Matrix& keys,
                           const Matrix& values, std::size_t valid_len,
                           std::size_t num_heads) {
  const std::size_t d = keys.cols();
  const std::size_t head_dim = d / num_heads;
  const std::size_t rows = keys.rows();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  DecodeOutput out;
  out.output.assign(d, 0.0f);
  out.attn_weights.resize(num_heads);
  std::vector<double> logits(rows);
  std::vector<double> acc(head_dim);

  for (std::size_t h = 0; h < num_heads; ++h) {
    const std::size_t off = h * head_dim;
    double max_logit = kNegInf;
    for (std::size_t j = 0; j < rows; ++j) {
      if (j >= valid_len) {
        logits[j] = kNegInf;
        continue;
      }
      const auto key = keys.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < head_dim; ++c) {
        dot += static_cast<double>(query[off + c]) * key[off + c];
      }
      logits[j] = dot * inv_sqrt;
      max_logit = std::max(max_logit, logits[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
      logits[j] = std::exp(logits[j] - max_logit);
      sum += logits[j];
    }
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < rows; ++j) {
      const double a = logits[j] / sum;
      const auto value = values.row(j);
      for (std::size_t c = 0; c < head_dim; ++c) acc[c] += a * value[off + c];
    }
    for (std::size_t c = 0; c < head_dim; ++c) {
      out.output[off + c] = static_cast<float>(acc[c]);
    }
    auto& weights = out.attn_weights[h];
    weights.resize(valid_len);
    for (std::size_t j = 0; j < valid_len; ++j) weights[j] = logits[j] / sum;
  }
  return out;
}

template <typename Cache>
Matrix prefill_impl(const Matrix& x, const AttentionWeights& w, Cache& cache,
                    std::size_t layer) {
  require(cache.token_count(layer) == 0, ErrorKind::kState,
          "prefill needs an empty layer; layer " + std::to_string(layer) + " holds " +
              std::to_string(cache.token_count(layer)) + " tokens");
  require(x.rows() >= 1, ErrorKind::kShape, "prefill needs at least one token");
  require(w.hidden_size() == cache.config().hidden_size, ErrorKind::kShape,
          "weights do not match the cache hidden size");
  const auto p = project_qkv(x, w);
  cache.append_prefill(layer, p.k, p.v);
  const auto kv = cache.materialize(layer);

  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = attend_prefix(p.q.row(i), kv.keys, kv.values, i + 1,
                                   cache.config().num_heads);
    std::copy(row.output.begin(), row.output.end(), out.row(i).begin());
  }
  return out;
}

template <typename Cache>
DecodeOutput decode_impl(std::span<const float> token, const AttentionWeights& w,
                         Cache& cache, std::size_t layer) {
  const std::size_t d = cache.config().hidden_size;
  require(token.size() == d, ErrorKind::kShape,
          "token has width " + std::to_string(token.size()) + ", expected " +
              std::to_string(d));
  require(w.hidden_size() == d, ErrorKind::kShape,
          "weights do not match the cache hidden size");
  const Matrix t(1, d, std::vector<float>(token.begin(), token.end()));
  const auto p = project_qkv(t, w);
  // The new token is stored first and attends to itself.
  cache.append_token(layer, p.k.row(0), p.v.row(0));
  const auto kv = cache.materialize(layer);
  return attend(p.q.row(0), kv, cache.config().num_heads);
}

}  // namespace

void AttentionWeights::validate() const {
  const std::size_t d = w_q.rows();
  require(d >= 1, ErrorKind::kShape, "attention weights are empty");
  check_square(w_q, d, "W_Q");
  check_square(w_k, d, "W_K");
  check_square(w_v, d, "W_V");
}

Projections project_qkv(const Matrix& x, const AttentionWeights& w) {
  w.validate();
  require(x.cols() == w.hidden_size(), ErrorKind::kShape,
          "input width " + std::to_string(x.cols()) + " does not match weights " +
              std::to_string(w.hidden_size()));
  return Projections{matmul(x, w.w_q), matmul(x, w.w_k), matmul(x, w.w_v)};
}

DecodeOutput attend(std::span<const float> query, const MaterializedKv& kv,
                    std::size_t num_heads) {
  require(num_heads >= 1 && kv.keys.cols() % num_heads == 0, ErrorKind::kShape,
          "hidden size not divisible by head count");
  require(query.size() == kv.keys.cols(), ErrorKind::kShape, "query width mismatch");
  require(kv.valid_len >= 1 && kv.valid_len <= kv.keys.rows(), ErrorKind::kState,
          "materialized cache has no valid rows");
  return attend_prefix(query, kv.keys, kv.values, kv.valid_len, num_heads);
}

Matrix prefill(const Matrix& x, const AttentionWeights& w, KvCache& cache,
               std::size_t layer) {
  return prefill_impl(x, w, cache, layer);
}

Matrix prefill(const Matrix& x, const AttentionWeights& w, ExactKvCache& cache,
               std::size_t layer) {
  return prefill_impl(x, w, cache, layer);
}

DecodeOutput decode_step(std::span<const float> token, const AttentionWeights& w,
                         KvCache& cache, std::size_t layer) {
  return decode_impl(token, w, cache, layer);
}

DecodeOutput decode_step(std::span<const float> token, const AttentionWeights& w,
                         ExactKvCache& cache, std::size_t layer) {
  return decode_impl(token, w, cache, layer);
}

}  // namespace nqkv
