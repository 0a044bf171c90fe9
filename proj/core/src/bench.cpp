#include "nqkv/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "nqkv/attention.hpp"
#include "nqkv/codec.hpp"
#include "nqkv/error.hpp"
#include "nqkv/kv_cache.hpp"
#include "nqkv/rng.hpp"

namespace nqkv {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double draw(Rng& rng, Distribution d) {
  switch (d) {
    case Distribution::kNormal: return rng.normal();
    case Distribution::kUniform: return rng.uniform(-1.0, 1.0);
    case Distribution::kLaplace: return rng.laplace();
    case Distribution::kZero: return 0.0;
  }
  return 0.0;
}

struct ErrorAccumulator {
  double rmse_sum = 0.0;
  double sq_sum = 0.0;
  double max_error = 0.0;
  std::size_t blocks = 0;
  std::size_t elements = 0;

  void add(std::span<const float> block, const Codebook& cb) {
    const auto deq = dequantize_block(quantize_block(block, cb), cb);
    double sq = 0.0;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double e = std::fabs(static_cast<double>(block[i]) - deq[i]);
      sq += e * e;
      max_error = std::max(max_error, e);
    }
    sq_sum += sq;
    rmse_sum += std::sqrt(sq / static_cast<double>(block.size()));
    ++blocks;
    elements += block.size();
  }

  CodecErrorStats stats(const std::string& id) const {
    CodecErrorStats s;
    s.codec = id;
    if (blocks > 0) {
      s.mean_rmse = rmse_sum / static_cast<double>(blocks);
      s.mean_mse = sq_sum / static_cast<double>(elements);
    }
    s.max_error = max_error;
    return s;
  }
};

double relative_l2(std::span<const float> a, std::span<const float> ref) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - ref[i];
    num += d * d;
    den += static_cast<double>(ref[i]) * ref[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

std::size_t readout_argmax(std::span<const float> out, const Matrix& readout) {
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < readout.cols(); ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) v += static_cast<double>(out[i]) * readout(i, j);
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  return best;
}

struct Workload {
  AttentionWeights weights;
  Matrix prompt;
  Matrix tokens;
  Matrix readout;
};

Workload make_workload(const SimulateConfig& c, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0));
  const double w_std = 1.0 / std::sqrt(static_cast<double>(c.hidden_size));
  Workload w;
  w.weights.w_q = rng.normal_matrix(c.hidden_size, c.hidden_size, w_std);
  w.weights.w_k = rng.normal_matrix(c.hidden_size, c.hidden_size, w_std);
  w.weights.w_v = rng.normal_matrix(c.hidden_size, c.hidden_size, w_std);
  w.prompt = rng.normal_matrix(c.prompt_len, c.hidden_size);
  w.tokens = rng.normal_matrix(c.gen_len, c.hidden_size);
  w.readout = rng.normal_matrix(c.hidden_size, c.readout_size);
  return w;
}

struct RunResult {
  std::vector<std::vector<float>> outputs;  // one t_O per decode step
  std::size_t cache_bytes = 0;
};

template <typename Cache>
RunResult run_pipeline(const Workload& w, Cache& cache) {
  RunResult r;
  prefill(w.prompt, w.weights, cache, 0);
  for (std::size_t i = 0; i < w.tokens.rows(); ++i) {
    r.outputs.push_back(decode_step(w.tokens.row(i), w.weights, cache, 0).output);
  }
  r.cache_bytes = cache.memory_bytes();
  return r;
}

KvCacheConfig cache_config(const SimulateConfig& c, CodebookKind kind) {
  KvCacheConfig k;
  k.num_layers = 1;
  k.hidden_size = c.hidden_size;
  k.num_heads = c.num_heads;
  k.block_size = c.block_size;
  k.bits = c.bits;
  k.pad_multiple = c.pad_multiple;
  k.codec = kind;
  return k;
}

// Per-seed traces, one per requested codec, in config.codecs order.
std::vector<SeedTrace> simulate_seed(const SimulateConfig& c, std::uint64_t seed) {
  const auto w = make_workload(c, seed);
  ExactKvCache exact_cache(cache_config(c, CodebookKind::kNormalFloat));
  const auto exact = run_pipeline(w, exact_cache);
  const std::size_t exact_argmax =
      c.gen_len > 0 ? readout_argmax(exact.outputs.back(), w.readout) : 0;

  std::vector<SeedTrace> traces;
  for (const auto codec : c.codecs) {
    RunResult run;
    if (codec == CacheCodec::kExact) {
      run = exact;
    } else {
      KvCache cache(cache_config(c, codec == CacheCodec::kNormalFloat
                                        ? CodebookKind::kNormalFloat
                                        : CodebookKind::kUniform));
      run = run_pipeline(w, cache);
    }
    SeedTrace t;
    t.seed = seed;
    t.cache_bytes = run.cache_bytes;
    for (std::size_t i = 0; i < run.outputs.size(); ++i) {
      t.divergence.push_back(relative_l2(run.outputs[i], exact.outputs[i]));
    }
    t.final_argmax_agrees =
        c.gen_len == 0 || readout_argmax(run.outputs.back(), w.readout) == exact_argmax;
    traces.push_back(std::move(t));
  }
  return traces;
}

}  // namespace

const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::kNormal: return "normal";
    case Distribution::kUniform: return "uniform";
    case Distribution::kLaplace: return "laplace";
    case Distribution::kZero: return "zero";
  }
  return "?";
}

Distribution distribution_from_string(const std::string& name) {
  for (auto d : {Distribution::kNormal, Distribution::kUniform, Distribution::kLaplace,
                 Distribution::kZero}) {
    if (name == to_string(d)) return d;
  }
  fail(ErrorKind::kConfiguration, "unknown distribution '" + name + "'");
}

const char* to_string(CacheCodec c) {
  switch (c) {
    case CacheCodec::kExact: return "exact";
    case CacheCodec::kNormalFloat: return "nf";
    case CacheCodec::kUniform: return "uniform";
  }
  return "?";
}

CacheCodec cache_codec_from_string(const std::string& name) {
  for (auto c : {CacheCodec::kExact, CacheCodec::kNormalFloat, CacheCodec::kUniform}) {
    if (name == to_string(c)) return c;
  }
  fail(ErrorKind::kConfiguration, "unknown cache codec '" + name + "'");
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  std::iota(seeds.begin(), seeds.end(), base);
  return seeds;
}

ErrorBenchReport error_benchmark(const ErrorBenchConfig& config) {
  require(config.num_blocks >= 1, ErrorKind::kConfiguration, "num_blocks must be >= 1");
  require(config.block_size >= 1, ErrorKind::kConfiguration, "block_size must be >= 1");
  require(!config.seeds.empty(), ErrorKind::kConfiguration, "at least one seed required");
  const auto nf = build_nf_codebook(config.bits);
  const auto uniform = build_uniform_codebook(config.bits);

  ErrorBenchReport report;
  report.config = config;
  std::sort(report.config.seeds.begin(), report.config.seeds.end());
  std::vector<float> block(config.block_size);
  for (const auto dist : config.distributions) {
    ErrorAccumulator nf_acc;
    ErrorAccumulator uni_acc;
    for (const auto seed : report.config.seeds) {
      Rng rng(mix_seed(seed, 1 + static_cast<std::uint64_t>(dist)));
      for (std::size_t b = 0; b < config.num_blocks; ++b) {
        for (auto& v : block) v = static_cast<float>(draw(rng, dist));
        nf_acc.add(block, nf);
        uni_acc.add(block, uniform);
      }
    }
    DistributionResult r;
    r.distribution = dist;
    r.nf = nf_acc.stats(nf.id());
    r.uniform = uni_acc.stats(uniform.id());
    r.rmse_ratio = r.uniform.mean_rmse > 0.0 ? r.nf.mean_rmse / r.uniform.mean_rmse : 0.0;
    report.results.push_back(r);
  }
  return report;
}

SimulateReport simulate_decode(const SimulateConfig& config) {
  require(config.num_heads >= 1 && config.hidden_size % config.num_heads == 0,
          ErrorKind::kShape, "hidden size must be divisible by the head count");
  require(config.prompt_len >= 1, ErrorKind::kShape, "prompt must hold at least one token");
  require(!config.seeds.empty(), ErrorKind::kConfiguration, "at least one seed required");
  require(!config.codecs.empty(), ErrorKind::kConfiguration, "at least one codec required");
  cache_config(config, CodebookKind::kNormalFloat).validate();

  SimulateReport report;
  report.config = config;
  auto& seeds = report.config.seeds;
  std::sort(seeds.begin(), seeds.end());

  std::vector<std::vector<SeedTrace>> per_seed(seeds.size());
  std::size_t threads = config.threads != 0 ? config.threads
                                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, seeds.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < seeds.size(); i += threads) {
          per_seed[i] = simulate_seed(report.config, seeds[i]);
        }
      });
    }
  }

  for (std::size_t ci = 0; ci < config.codecs.size(); ++ci) {
    CodecTrace trace;
    trace.codec = config.codecs[ci];
    trace.mean_per_step.assign(config.gen_len, 0.0);
    std::size_t agree = 0;
    double total = 0.0;
    for (auto& s : per_seed) {
      auto& st = s[ci];
      for (std::size_t i = 0; i < st.divergence.size(); ++i) {
        trace.mean_per_step[i] += st.divergence[i];
        total += st.divergence[i];
      }
      agree += st.final_argmax_agrees ? 1 : 0;
      trace.seeds.push_back(std::move(st));
    }
    const double n = static_cast<double>(seeds.size());
    for (auto& v : trace.mean_per_step) v /= n;
    trace.mean_divergence =
        config.gen_len > 0 ? total / (n * static_cast<double>(config.gen_len)) : 0.0;
    trace.argmax_agreement = static_cast<double>(agree) / n;
    report.codecs.push_back(std::move(trace));
  }
  return report;
}

}  // namespace nqkv
