#include "report_json.hpp"

#include <string>

#include "nqkv/error.hpp"

namespace nqkv::tools {

using nlohmann::json;

json to_json(const Codebook& cb) {
  json values = json::array();
  for (float v : cb.codepoints()) values.push_back(v);
  return {{"id", cb.id()},
          {"kind", to_string(cb.kind())},
          {"bits", cb.bits()},
          {"zero_index", cb.zero_index()},
          {"max_gap", cb.max_gap()},
          {"codepoints", values}};
}

json to_json(const NormalityReport& r) {
  return {{"block", r.block_index}, {"n", r.n},   {"skew_z", r.skew_z},
          {"kurt_z", r.kurt_z},     {"k2", r.k2}, {"p_value", r.p_value},
          {"normal", r.normal_at_alpha}};
}

json to_json(std::span<const NormalityReport> reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(to_json(r));
  return out;
}

json to_json(const ModelSpec& s) {
  return {{"name", s.name},
          {"num_layers", s.num_layers},
          {"hidden_size", s.hidden_size},
          {"num_params", s.num_params},
          {"weight_bits", s.weight_bits},
          {"kv_bits", s.kv_bits},
          {"kv_block_size", s.kv_block_size},
          {"scale_bits", s.scale_bits}};
}

json to_json(const MemoryEstimate& e) {
  return {{"kv_bytes", e.kv_bytes},
          {"weight_bytes", e.weight_bytes},
          {"kv_fraction", e.kv_fraction},
          {"kv_to_weights", e.kv_to_weights},
          {"effective_kv_bits", e.effective_kv_bits}};
}

namespace {

json to_json(const CodecErrorStats& s) {
  return {{"codec", s.codec},
          {"mean_rmse", s.mean_rmse},
          {"mean_mse", s.mean_mse},
          {"max_error", s.max_error}};
}

}  // namespace

json to_json(const ErrorBenchReport& report) {
  json dists = json::array();
  for (auto d : report.config.distributions) dists.push_back(to_string(d));
  json results = json::array();
  for (const auto& r : report.results) {
    results.push_back({{"distribution", to_string(r.distribution)},
                       {"codecs", json::array({to_json(r.nf), to_json(r.uniform)})},
                       {"nf_to_uniform_rmse_ratio", r.rmse_ratio}});
  }
  return {{"command", "bench"},
          {"config",
           {{"block_size", report.config.block_size},
            {"bits", report.config.bits},
            {"blocks_per_seed", report.config.num_blocks},
            {"distributions", dists}}},
          {"seeds", report.config.seeds},
          {"results", results}};
}

json to_json(const SimulateReport& report) {
  const auto& c = report.config;
  json codecs = json::array();
  for (const auto& t : report.codecs) {
    json seeds = json::array();
    for (const auto& s : t.seeds) {
      seeds.push_back({{"seed", s.seed},
                       {"divergence", s.divergence},
                       {"final_argmax_agrees", s.final_argmax_agrees},
                       {"cache_bytes", s.cache_bytes}});
    }
    codecs.push_back({{"codec", to_string(t.codec)},
                      {"mean_divergence", t.mean_divergence},
                      {"mean_divergence_per_step", t.mean_per_step},
                      {"argmax_agreement", t.argmax_agreement},
                      {"per_seed", seeds}});
  }
  json codec_names = json::array();
  for (auto cc : c.codecs) codec_names.push_back(to_string(cc));
  return {{"command", "simulate"},
          {"config",
           {{"d", c.hidden_size},
            {"heads", c.num_heads},
            {"prompt", c.prompt_len},
            {"gen", c.gen_len},
            {"block_size", c.block_size},
            {"bits", c.bits},
            {"pad_multiple", c.pad_multiple},
            {"readout_size", c.readout_size},
            {"codecs", codec_names}}},
          {"seeds", c.seeds},
          {"codecs", codecs}};
}

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec s;
  try {
    s.name = j.value("name", std::string("model"));
    s.num_layers = j.at("num_layers").get<std::uint64_t>();
    s.hidden_size = j.at("hidden_size").get<std::uint64_t>();
    // Parameter counts are often written as 1.75e11.
    s.num_params = static_cast<std::uint64_t>(j.at("num_params").get<double>());
    s.weight_bits = j.value("weight_bits", std::uint64_t{16});
    s.kv_bits = j.value("kv_bits", std::uint64_t{16});
    s.kv_block_size = j.value("kv_block_size", std::uint64_t{256});
    s.scale_bits = j.value("scale_bits", std::uint64_t{32});
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfiguration, std::string("model spec: ") + e.what());
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Report schemas. A small JSON Schema subset: type, required, properties,
// items, minimum, maximum, enum.

namespace {

const json& normality_schema() {
  static const json schema = json::parse(R"({
    "type": "array",
    "items": {
      "type": "object",
      "required": ["block", "n", "skew_z", "kurt_z", "k2", "p_value", "normal"],
      "properties": {
        "block": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 20},
        "skew_z": {"type": "number"},
        "kurt_z": {"type": "number"},
        "k2": {"type": "number", "minimum": 0},
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "normal": {"type": "boolean"}
      }
    }
  })");
  return schema;
}

const json& bench_schema() {
  static const json schema = json::parse(R"({
    "type": "object",
    "required": ["command", "config", "seeds", "results"],
    "properties": {
      "command": {"enum": ["bench"]},
      "config": {
        "type": "object",
        "required": ["block_size", "bits", "blocks_per_seed", "distributions"],
        "properties": {
          "block_size": {"type": "integer", "minimum": 1},
          "bits": {"type": "integer", "minimum": 2, "maximum": 8},
          "blocks_per_seed": {"type": "integer", "minimum": 1},
          "distributions": {"type": "array", "items": {"enum": ["normal", "uniform", "laplace", "zero"]}}
        }
      },
      "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}},
      "results": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["distribution", "codecs", "nf_to_uniform_rmse_ratio"],
          "properties": {
            "distribution": {"enum": ["normal", "uniform", "laplace", "zero"]},
            "nf_to_uniform_rmse_ratio": {"type": "number", "minimum": 0},
            "codecs": {
              "type": "array",
              "items": {
                "type": "object",
                "required": ["codec", "mean_rmse", "mean_mse", "max_error"],
                "properties": {
                  "codec": {"type": "string"},
                  "mean_rmse": {"type": "number", "minimum": 0},
                  "mean_mse": {"type": "number", "minimum": 0},
                  "max_error": {"type": "number", "minimum": 0}
                }
              }
            }
          }
        }
      }
    }
  })");
  return schema;
}

const json& simulate_schema() {
  static const json schema = json::parse(R"({
    "type": "object",
    "required": ["command", "config", "seeds", "codecs"],
    "properties": {
      "command": {"enum": ["simulate"]},
      "config": {
        "type": "object",
        "required": ["d", "heads", "prompt", "gen", "block_size", "bits", "pad_multiple", "readout_size", "codecs"],
        "properties": {
          "d": {"type": "integer", "minimum": 1},
          "heads": {"type": "integer", "minimum": 1},
          "prompt": {"type": "integer", "minimum": 1},
          "gen": {"type": "integer", "minimum": 0},
          "block_size": {"type": "integer", "minimum": 1},
          "bits": {"type": "integer", "minimum": 1, "maximum": 4},
          "pad_multiple": {"type": "integer", "minimum": 1},
          "readout_size": {"type": "integer", "minimum": 1},
          "codecs": {"type": "array", "items": {"enum": ["exact", "nf", "uniform"]}}
        }
      },
      "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}},
      "codecs": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["codec", "mean_divergence", "mean_divergence_per_step", "argmax_agreement", "per_seed"],
          "properties": {
            "codec": {"enum": ["exact", "nf", "uniform"]},
            "mean_divergence": {"type": "number", "minimum": 0},
            "mean_divergence_per_step": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "argmax_agreement": {"type": "number", "minimum": 0, "maximum": 1},
            "per_seed": {
              "type": "array",
              "items": {
                "type": "object",
                "required": ["seed", "divergence", "final_argmax_agrees", "cache_bytes"],
                "properties": {
                  "seed": {"type": "integer", "minimum": 0},
                  "divergence": {"type": "array", "items": {"type": "number", "minimum": 0}},
                  "final_argmax_agrees": {"type": "boolean"},
                  "cache_bytes": {"type": "integer", "minimum": 0}
                }
              }
            }
          }
        }
      }
    }
  })");
  return schema;
}

const json& memsize_schema() {
  static const json schema = json::parse(R"({
    "type": "object",
    "required": ["command", "model", "batch", "seqlen", "estimate"],
    "properties": {
      "command": {"enum": ["memsize"]},
      "batch": {"type": "integer", "minimum": 1},
      "seqlen": {"type": "integer", "minimum": 1},
      "model": {"type": "object", "required": ["name", "num_layers", "hidden_size", "num_params", "weight_bits", "kv_bits", "kv_block_size", "scale_bits"]},
      "estimate": {
        "type": "object",
        "required": ["kv_bytes", "weight_bytes", "kv_fraction", "kv_to_weights", "effective_kv_bits"],
        "properties": {
          "kv_bytes": {"type": "integer", "minimum": 0},
          "weight_bytes": {"type": "integer", "minimum": 0},
          "kv_fraction": {"type": "number", "minimum": 0, "maximum": 1},
          "kv_to_weights": {"type": "number", "minimum": 0},
          "effective_kv_bits": {"type": "number", "minimum": 0}
        }
      }
    }
  })");
  return schema;
}

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  return false;
}

std::string validate(const json& value, const json& schema, const std::string& path) {
  if (schema.contains("type") && !type_matches(value, schema["type"].get<std::string>())) {
    return path + ": expected " + schema["type"].get<std::string>();
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == value;
    if (!found) return path + ": value " + value.dump() + " not in enum";
  }
  if (value.is_number()) {
    const double v = value.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      return path + ": below minimum";
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      return path + ": above maximum";
    }
  }
  if (value.is_object()) {
    for (const auto& key : schema.value("required", json::array())) {
      if (!value.contains(key.get<std::string>())) {
        return path + ": missing '" + key.get<std::string>() + "'";
      }
    }
    const json properties = schema.value("properties", json::object());
    for (const auto& [key, sub] : properties.items()) {
      if (value.contains(key)) {
        if (auto err = validate(value[key], sub, path + "." + key); !err.empty()) return err;
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (auto err = validate(value[i], schema["items"], path + "[" + std::to_string(i) + "]");
          !err.empty()) {
        return err;
      }
    }
  }
  return {};
}

}  // namespace

const json& report_schema(const std::string& name) {
  if (name == "analyze") return normality_schema();
  if (name == "bench") return bench_schema();
  if (name == "simulate") return simulate_schema();
  if (name == "memsize") return memsize_schema();
  fail(ErrorKind::kConfiguration, "no schema named '" + name + "'");
}

std::string validate_normality_json(const json& j) { return validate(j, normality_schema(), "$"); }
std::string validate_bench_json(const json& j) { return validate(j, bench_schema(), "$"); }
std::string validate_simulate_json(const json& j) { return validate(j, simulate_schema(), "$"); }
std::string validate_memsize_json(const json& j) { return validate(j, memsize_schema(), "$"); }

}  // namespace nqkv::tools
