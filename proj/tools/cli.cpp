#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "nqkv/bench.hpp"
#include "nqkv/codebook.hpp"
#include "nqkv/codec.hpp"
#include "nqkv/error.hpp"
#include "nqkv/memory_model.hpp"
#include "nqkv/normality.hpp"
#include "nqkv/nqt_format.hpp"
#include "nqkv/raw_tensor.hpp"
#include "nqkv/rng.hpp"
#include "report_json.hpp"

namespace nqkv::tools {

namespace {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration:
    case ErrorKind::kDomain:
    case ErrorKind::kShape:
    case ErrorKind::kRange:
    case ErrorKind::kState:
      return kExitConfig;
    case ErrorKind::kData:
    case ErrorKind::kCorruption:
    case ErrorKind::kFormat:
    case ErrorKind::kSampleSize:
    case ErrorKind::kDegenerateData:
      return kExitData;
  }
  return kExitData;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

struct CodebookArgs {
  int bits = 4;
  std::string kind = "nf";
  bool as_json = false;
};

void run_codebook(const CodebookArgs& a, std::ostream& out) {
  const auto cb = build_codebook(codebook_kind_from_string(a.kind), a.bits);
  if (a.as_json) {
    emit(out, to_json(cb));
    return;
  }
  out << "# " << cb.id() << " (" << cb.size() << " codepoints)\n";
  for (std::size_t i = 0; i < cb.size(); ++i) {
    out << i << '\t' << fmt("%+.9f", cb[i]) << '\n';
  }
}

struct QuantizeArgs {
  std::string in;
  std::string out;
  std::size_t block_size = 256;
  int bits = 4;
  std::string kind = "nf";
};

void run_quantize(const QuantizeArgs& a, std::ostream& out) {
  const auto m = ingest_tensor(a.in);
  const auto cb = build_codebook(codebook_kind_from_string(a.kind), a.bits);
  const auto qt = encode_tensor(m, a.block_size, cb);
  write_nqt(a.out, qt);
  emit(out, {{"command", "quantize"},
             {"in", a.in},
             {"out", a.out},
             {"rows", qt.rows()},
             {"cols", qt.cols()},
             {"block_size", qt.block_size()},
             {"bits", qt.bits()},
             {"codebook_id", qt.codebook_id()},
             {"scale_count", qt.scales().size()},
             {"packed_bytes", qt.packed().size()}});
}

struct DequantizeArgs {
  std::string in;
  std::string out;
};

void run_dequantize(const DequantizeArgs& a, std::ostream& out) {
  const auto qt = read_nqt(a.in);
  const auto m = decode_tensor(qt, codebook_from_id(qt.codebook_id()));
  write_raw_tensor(a.out, m);
  emit(out, {{"command", "dequantize"},
             {"in", a.in},
             {"out", a.out},
             {"rows", m.rows()},
             {"cols", m.cols()},
             {"codebook_id", qt.codebook_id()}});
}

struct AnalyzeArgs {
  std::string in;
  std::size_t block_size = 256;
  double alpha = 0.05;
  std::size_t token = 0;
  bool pooled = false;
  bool pretty = false;
};

void run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto m = ingest_tensor(a.in);
  const auto reports =
      block_normality_report(m, a.block_size, a.alpha, BlockSelector{a.token, a.pooled});
  if (a.pretty) {
    out << format_normality_table(reports, a.alpha);
    return;
  }
  emit(out, to_json(std::span<const NormalityReport>(reports)));
}

struct MemsizeArgs {
  std::string model;
  std::uint64_t batch = 1;
  std::uint64_t seqlen = 1;
  std::optional<std::uint64_t> kv_bits;
  std::optional<std::uint64_t> block_size;
  std::optional<std::uint64_t> scale_bits;
  bool pretty = false;
};

void run_memsize(const MemsizeArgs& a, std::ostream& out) {
  json spec_json;
  {
    std::ifstream file(a.model);
    require(static_cast<bool>(file), ErrorKind::kConfiguration,
            "cannot open model spec '" + a.model + "'");
    try {
      spec_json = json::parse(file);
    } catch (const json::exception& e) {
      fail(ErrorKind::kConfiguration, std::string("model spec: ") + e.what());
    }
  }
  auto spec = model_spec_from_json(spec_json);
  if (a.kv_bits) spec.kv_bits = *a.kv_bits;
  if (a.block_size) spec.kv_block_size = *a.block_size;
  if (a.scale_bits) spec.scale_bits = *a.scale_bits;
  const auto est = kv_memory_model(spec, a.batch, a.seqlen);
  if (a.pretty) {
    out << spec.name << "  batch=" << a.batch << "  seqlen=" << a.seqlen << '\n'
        << "  effective kv bits : " << fmt("%.4f", est.effective_kv_bits) << '\n'
        << "  kv cache          : " << fmt("%.4e", static_cast<double>(est.kv_bytes))
        << " bytes\n"
        << "  weights           : " << fmt("%.4e", static_cast<double>(est.weight_bytes))
        << " bytes\n"
        << "  kv / weights      : " << fmt("%.3f", est.kv_to_weights) << '\n'
        << "  kv fraction       : " << fmt("%.4f", est.kv_fraction) << '\n';
    return;
  }
  emit(out, {{"command", "memsize"},
             {"model", to_json(spec)},
             {"batch", a.batch},
             {"seqlen", a.seqlen},
             {"estimate", to_json(est)}});
}

struct BenchArgs {
  std::size_t blocks = 10000;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t block_size = 256;
  int bits = 4;
  std::vector<std::string> distributions{"normal", "uniform", "laplace"};
  bool pretty = false;
};

void run_bench(const BenchArgs& a, std::ostream& out) {
  ErrorBenchConfig c;
  c.block_size = a.block_size;
  c.bits = a.bits;
  c.num_blocks = a.blocks;
  c.seeds = seed_range(a.seed, a.seeds);
  c.distributions.clear();
  for (const auto& d : a.distributions) c.distributions.push_back(distribution_from_string(d));
  const auto report = error_benchmark(c);
  if (a.pretty) {
    out << "distribution  codec      mean_rmse     max_error    nf/uniform\n";
    for (const auto& r : report.results) {
      for (const auto* s : {&r.nf, &r.uniform}) {
        char line[128];
        std::snprintf(line, sizeof line, "%-12s  %-9s  %-12.6g  %-11.6g  %s\n",
                      to_string(r.distribution), s->codec.c_str(), s->mean_rmse,
                      s->max_error, s == &r.nf ? fmt("%.4f", r.rmse_ratio).c_str() : "");
        out << line;
      }
    }
    return;
  }
  emit(out, to_json(report));
}

struct SimulateArgs {
  std::size_t d = 128;
  std::size_t heads = 4;
  std::size_t prompt = 32;
  std::size_t gen = 32;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t block_size = 64;
  int bits = 4;
  std::size_t pad = 16;
  std::size_t threads = 0;
  std::vector<std::string> codecs{"exact", "nf", "uniform"};
  bool pretty = false;
};

void run_simulate(const SimulateArgs& a, std::ostream& out) {
  SimulateConfig c;
  c.hidden_size = a.d;
  c.num_heads = a.heads;
  c.prompt_len = a.prompt;
  c.gen_len = a.gen;
  c.block_size = a.block_size;
  c.bits = a.bits;
  c.pad_multiple = a.pad;
  c.threads = a.threads;
  c.seeds = seed_range(a.seed, a.seeds);
  c.codecs.clear();
  for (const auto& name : a.codecs) c.codecs.push_back(cache_codec_from_string(name));
  const auto report = simulate_decode(c);
  if (a.pretty) {
    out << "codec     mean_divergence  argmax_agreement  cache_bytes\n";
    for (const auto& t : report.codecs) {
      char line[128];
      std::snprintf(line, sizeof line, "%-8s  %-15.6g  %-16.3f  %zu\n", to_string(t.codec),
                    t.mean_divergence, t.argmax_agreement,
                    t.seeds.empty() ? std::size_t{0} : t.seeds.front().cache_bytes);
      out << line;
    }
    return;
  }
  emit(out, to_json(report));
}

struct SynthArgs {
  std::string out;
  std::size_t rows = 1;
  std::size_t cols = 4096;
  std::string dist = "normal";
  std::uint64_t seed = 0;
};

void run_synth(const SynthArgs& a, std::ostream& out) {
  const auto dist = distribution_from_string(a.dist);
  require(a.rows >= 1 && a.cols >= 1, ErrorKind::kShape, "synth needs rows, cols >= 1");
  Rng rng(a.seed);
  Matrix m(a.rows, a.cols);
  for (float& v : m.data()) {
    switch (dist) {
      case Distribution::kNormal: v = static_cast<float>(rng.normal()); break;
      case Distribution::kUniform: v = static_cast<float>(rng.uniform(-1.0, 1.0)); break;
      case Distribution::kLaplace: v = static_cast<float>(rng.laplace()); break;
      case Distribution::kZero: v = 0.0f; break;
    }
  }
  write_raw_tensor(a.out, m);
  emit(out, {{"command", "synth"},
             {"out", a.out},
             {"rows", a.rows},
             {"cols", a.cols},
             {"distribution", a.dist},
             {"seed", a.seed}});
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nqkv: block-wise NormalFloat KV-cache quantization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nqkv 0.1.0");

  CodebookArgs codebook_args;
  auto* codebook = app.add_subcommand("codebook", "Print a quantization codebook");
  codebook->add_option("--bits", codebook_args.bits, "Index bits (2-8)")->required();
  codebook->add_option("--kind", codebook_args.kind, "nf | uniform");
  codebook->add_flag("--json", codebook_args.as_json, "Emit JSON");

  QuantizeArgs quantize_args;
  auto* quantize = app.add_subcommand("quantize", "Raw tensor -> .nqt");
  quantize->add_option("--in", quantize_args.in, "Raw tensor file")->required();
  quantize->add_option("--out", quantize_args.out, "Output .nqt file")->required();
  quantize->add_option("--block-size", quantize_args.block_size, "Block size B")->required();
  quantize->add_option("--bits", quantize_args.bits, "Index bits (2-4)")->required();
  quantize->add_option("--codebook", quantize_args.kind, "nf | uniform");

  DequantizeArgs dequantize_args;
  auto* dequantize = app.add_subcommand("dequantize", ".nqt -> raw tensor");
  dequantize->add_option("--in", dequantize_args.in, "Input .nqt file")->required();
  dequantize->add_option("--out", dequantize_args.out, "Output raw tensor")->required();

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Per-block D'Agostino-Pearson report");
  analyze->add_option("--in", analyze_args.in, "Raw tensor file")->required();
  analyze->add_option("--block-size", analyze_args.block_size, "Block size B (>= 20)")
      ->required();
  analyze->add_option("--alpha", analyze_args.alpha, "Significance level");
  analyze->add_option("--token", analyze_args.token, "Token row to test");
  analyze->add_flag("--pooled", analyze_args.pooled, "Pool each block across all rows");
  analyze->add_flag("--pretty", analyze_args.pretty, "Aligned text table");

  MemsizeArgs memsize_args;
  auto* memsize = app.add_subcommand("memsize", "KV cache vs weight memory model");
  memsize->add_option("--model", memsize_args.model, "Model spec JSON")->required();
  memsize->add_option("--batch", memsize_args.batch, "Batch size")->required();
  memsize->add_option("--seqlen", memsize_args.seqlen, "Sequence length")->required();
  memsize->add_option("--kv-bits", memsize_args.kv_bits, "KV storage bits");
  memsize->add_option("--block-size", memsize_args.block_size, "KV quantization block");
  memsize->add_option("--scale-bits", memsize_args.scale_bits, "Bits per block scale");
  memsize->add_flag("--pretty", memsize_args.pretty, "Human-readable summary");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Codec round-trip error benchmark");
  bench->add_option("--blocks", bench_args.blocks, "Blocks per seed and distribution");
  bench->add_option("--seeds", bench_args.seeds, "Number of seeds");
  bench->add_option("--seed", bench_args.seed, "First seed");
  bench->add_option("--block-size", bench_args.block_size, "Block size");
  bench->add_option("--bits", bench_args.bits, "Index bits");
  bench->add_option("--dist", bench_args.distributions, "normal, uniform, laplace, zero")
      ->delimiter(',');
  bench->add_flag("--pretty", bench_args.pretty, "Aligned text table");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Synthetic decode divergence");
  simulate->add_option("--d", sim_args.d, "Hidden size");
  simulate->add_option("--heads", sim_args.heads, "Attention heads");
  simulate->add_option("--prompt", sim_args.prompt, "Prompt tokens");
  simulate->add_option("--gen", sim_args.gen, "Decode steps");
  simulate->add_option("--seeds", sim_args.seeds, "Number of seeds");
  simulate->add_option("--seed", sim_args.seed, "First seed");
  simulate->add_option("--block-size", sim_args.block_size, "KV quantization block");
  simulate->add_option("--bits", sim_args.bits, "Index bits (2-4)");
  simulate->add_option("--pad", sim_args.pad, "Token padding multiple");
  simulate->add_option("--threads", sim_args.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--codecs", sim_args.codecs, "exact, nf, uniform")->delimiter(',');
  simulate->add_flag("--pretty", sim_args.pretty, "Aligned text table");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic raw tensor");
  synth->add_option("--out", synth_args.out, "Output raw tensor")->required();
  synth->add_option("--rows", synth_args.rows, "Rows (tokens)");
  synth->add_option("--cols", synth_args.cols, "Columns (hidden size)");
  synth->add_option("--dist", synth_args.dist, "normal | uniform | laplace | zero");
  synth->add_option("--seed", synth_args.seed, "Seed");

  std::string schema_name;
  auto* schema = app.add_subcommand("schema", "Print the JSON schema of a report");
  schema->add_option("name", schema_name, "analyze | bench | simulate | memsize")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "nqkv 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "nqkv: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (codebook->parsed()) run_codebook(codebook_args, out);
    else if (quantize->parsed()) run_quantize(quantize_args, out);
    else if (dequantize->parsed()) run_dequantize(dequantize_args, out);
    else if (analyze->parsed()) run_analyze(analyze_args, out);
    else if (memsize->parsed()) run_memsize(memsize_args, out);
    else if (bench->parsed()) run_bench(bench_args, out);
    else if (simulate->parsed()) run_simulate(sim_args, out);
    else if (synth->parsed()) run_synth(synth_args, out);
    else if (schema->parsed()) emit(out, report_schema(schema_name));
  } catch (const Error& e) {
    err << "nqkv: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("nqkv");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace nqkv::tools
