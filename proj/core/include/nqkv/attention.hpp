#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nqkv/kv_cache.hpp"
#include "nqkv/matrix.hpp"

namespace nqkv {

// Query/key/value projections of one decoder layer, each d×d. Biases, the
// output projection and the rest of the block are not modelled.
struct AttentionWeights {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;

  std::size_t hidden_size() const noexcept { return w_q.rows(); }
  void validate() const;
};

struct Projections {
  Matrix q;
  Matrix k;
  Matrix v;
};

struct DecodeOutput {
  std::vector<float> output;  // t_O, width d
  // Per head, softmax weights over the valid (unpadded) positions.
  std::vector<std::vector<double>> attn_weights;
};

Projections project_qkv(const Matrix& x, const AttentionWeights& w);

// Multi-head scaled dot-product attention of one query row against a padded
// K'/V' working copy. Positions >= valid_len get -inf logits.
DecodeOutput attend(std::span<const float> query, const MaterializedKv& kv,
                    std::size_t num_heads);

// Prefill: projects, stores K/V into the empty layer, then runs causal
// attention over the dequantized K/V. Returns l×d outputs.
Matrix prefill(const Matrix& x, const AttentionWeights& w, KvCache& cache,
               std::size_t layer);
Matrix prefill(const Matrix& x, const AttentionWeights& w, ExactKvCache& cache,
               std::size_t layer);

// One decode step: project t, append t_K/t_V, materialize, attend.
DecodeOutput decode_step(std::span<const float> token, const AttentionWeights& w,
                         KvCache& cache, std::size_t layer);
DecodeOutput decode_step(std::span<const float> token, const AttentionWeights& w,
                         ExactKvCache& cache, std::size_t layer);

}  // namespace nqkv
