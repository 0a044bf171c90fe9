#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nqkv/codebook.hpp"

namespace nqkv {

enum class Distribution { kNormal, kUniform, kLaplace, kZero };

const char* to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

struct CodecErrorStats {
  std::string codec;        // codebook id
  double mean_rmse = 0.0;   // mean over blocks of per-block RMSE
  double mean_mse = 0.0;    // mean squared error over all elements
  double max_error = 0.0;
};

struct DistributionResult {
  Distribution distribution = Distribution::kNormal;
  CodecErrorStats nf;
  CodecErrorStats uniform;
  double rmse_ratio = 0.0;  // nf.mean_rmse / uniform.mean_rmse; 0 if both 0
};

struct ErrorBenchConfig {
  std::size_t block_size = 256;
  int bits = 4;
  std::size_t num_blocks = 10000;  // per seed
  std::vector<std::uint64_t> seeds{0};
  std::vector<Distribution> distributions{Distribution::kNormal,
                                          Distribution::kUniform,
                                          Distribution::kLaplace};
};

struct ErrorBenchReport {
  ErrorBenchConfig config;
  std::vector<DistributionResult> results;
};

// Quantizes num_blocks blocks per seed and distribution with the NormalFloat
// and uniform codebooks of the same width. Reports only; asserts nothing.
ErrorBenchReport error_benchmark(const ErrorBenchConfig& config);

enum class CacheCodec { kExact, kNormalFloat, kUniform };
const char* to_string(CacheCodec c);
CacheCodec cache_codec_from_string(const std::string& name);

struct SimulateConfig {
  std::size_t hidden_size = 128;
  std::size_t num_heads = 4;
  std::size_t prompt_len = 32;
  std::size_t gen_len = 32;
  std::size_t block_size = 64;
  int bits = 4;
  std::size_t pad_multiple = 16;
  std::size_t readout_size = 64;
  std::vector<std::uint64_t> seeds{0};
  std::vector<CacheCodec> codecs{CacheCodec::kExact, CacheCodec::kNormalFloat,
                                 CacheCodec::kUniform};
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct SeedTrace {
  std::uint64_t seed = 0;
  // Relative L2 distance of t_O to the exact-cache run, per decode step.
  std::vector<double> divergence;
  bool final_argmax_agrees = true;
  std::size_t cache_bytes = 0;
};

struct CodecTrace {
  CacheCodec codec = CacheCodec::kExact;
  std::vector<SeedTrace> seeds;      // sorted by seed
  std::vector<double> mean_per_step;
  double mean_divergence = 0.0;
  double argmax_agreement = 1.0;
};

struct SimulateReport {
  SimulateConfig config;
  std::vector<CodecTrace> codecs;
};

// Prefill + gen_len decode steps per seed, once per codec, on Gaussian weights
// and inputs. Divergence is measured against an exact float32 cache run.
SimulateReport simulate_decode(const SimulateConfig& config);

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count);

}  // namespace nqkv
