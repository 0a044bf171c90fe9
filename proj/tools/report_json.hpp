#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "nqkv/bench.hpp"
#include "nqkv/codebook.hpp"
#include "nqkv/memory_model.hpp"
#include "nqkv/normality.hpp"

namespace nqkv::tools {

nlohmann::json to_json(const Codebook& cb);
nlohmann::json to_json(const NormalityReport& r);
nlohmann::json to_json(std::span<const NormalityReport> reports);
nlohmann::json to_json(const ModelSpec& spec);
nlohmann::json to_json(const MemoryEstimate& est);
nlohmann::json to_json(const ErrorBenchReport& report);
nlohmann::json to_json(const SimulateReport& report);

ModelSpec model_spec_from_json(const nlohmann::json& j);

// JSON Schema (subset) for the report emitted by a subcommand: "analyze",
// "bench", "simulate" or "memsize".
const nlohmann::json& report_schema(const std::string& name);

// Structural checks of the emitted reports; returns an empty string when the
// document is well formed, otherwise the first violation.
std::string validate_normality_json(const nlohmann::json& j);
std::string validate_bench_json(const nlohmann::json& j);
std::string validate_simulate_json(const nlohmann::json& j);
std::string validate_memsize_json(const nlohmann::json& j);

}  // namespace nqkv::tools
