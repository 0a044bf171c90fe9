#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "nqkv/nqt_format.hpp"
#include "nqkv/raw_tensor.hpp"
#include "nqkv/rng.hpp"
#include "report_json.hpp"

#ifndef NQKV_MODELS_DIR
#error "NQKV_MODELS_DIR must be defined"
#endif

namespace nqkv::tools {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nqkv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, CodebookTextAndJson) {
  auto r = run({"codebook", "--bits", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("nf4"), std::string::npos);
  r = run({"codebook", "--bits", "4", "--json"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["codepoints"].size(), 16u);
  EXPECT_EQ(j["codepoints"][0], -1.0);
  EXPECT_EQ(j["codepoints"][15], 1.0);
  EXPECT_EQ(run({"codebook", "--bits", "9"}).code, kExitConfig);
}

TEST_F(CliTest, QuantizeDequantizeQuantizeIsByteStable) {
  Rng rng(1);
  write_raw_tensor(path("t.raw"), rng.normal_matrix(10, 300, 2.0));
  ASSERT_EQ(run({"quantize", "--in", path("t.raw"), "--out", path("a.nqt"), "--block-size",
                 "64", "--bits", "4"})
                .code,
            0);
  ASSERT_EQ(run({"dequantize", "--in", path("a.nqt"), "--out", path("b.raw")}).code, 0);
  ASSERT_EQ(run({"quantize", "--in", path("b.raw"), "--out", path("c.nqt"), "--block-size",
                 "64", "--bits", "4"})
                .code,
            0);
  EXPECT_EQ(read_file_bytes(path("a.nqt")), read_file_bytes(path("c.nqt")));
}

TEST_F(CliTest, DataErrorsExitThree) {
  std::ofstream(path("bad.raw")) << "{\"rows\":2,\"cols\":3}\nshort";
  const auto r = run({"quantize", "--in", path("bad.raw"), "--out", path("x.nqt"),
                      "--block-size", "4", "--bits", "4"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("expected 24"), std::string::npos) << r.err;
  EXPECT_EQ(run({"dequantize", "--in", path("missing.nqt"), "--out", path("y.raw")}).code,
            kExitData);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({"bench", "--dist", "cauchy", "--blocks", "1"}).code, kExitConfig);
  EXPECT_EQ(run({"simulate", "--d", "30", "--heads", "4"}).code, kExitConfig);
  EXPECT_EQ(run({"memsize", "--model", NQKV_MODELS_DIR "/opt-175b.json", "--batch", "0",
                 "--seqlen", "1"})
                .code,
            kExitConfig);
  EXPECT_EQ(run({"quantize", "--in", "x"}).code, kExitConfig);
}

TEST_F(CliTest, AnalyzeEmitsTableShapedReport) {
  Rng rng(2);
  write_raw_tensor(path("token.raw"), rng.normal_matrix(1, 4096));
  auto r = run({"analyze", "--in", path("token.raw"), "--block-size", "256", "--alpha", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.size(), 16u);
  EXPECT_EQ(validate_normality_json(j), "");
  r = run({"analyze", "--in", path("token.raw"), "--block-size", "256", "--pretty"});
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 17);
  EXPECT_EQ(run({"analyze", "--in", path("token.raw"), "--block-size", "256", "--token", "3"}).code,
            kExitConfig);
}

TEST_F(CliTest, MemsizeReport) {
  const auto r = run({"memsize", "--model", NQKV_MODELS_DIR "/opt-175b.json", "--batch", "64",
                      "--seqlen", "8192", "--kv-bits", "16", "--block-size", "256"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(validate_memsize_json(j), "");
  EXPECT_EQ(j["estimate"]["kv_bytes"].get<std::uint64_t>(), 2473901162496ULL);
  const auto q = json::parse(run({"memsize", "--model", NQKV_MODELS_DIR "/opt-175b.json",
                                  "--batch", "64", "--seqlen", "8192", "--kv-bits", "4",
                                  "--block-size", "256"})
                                 .out);
  EXPECT_EQ(q["estimate"]["effective_kv_bits"].get<double>(), 4.125);
}

TEST_F(CliTest, BenchAndSimulateReportsMatchSchema) {
  auto r = run({"bench", "--blocks", "200", "--seeds", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(validate_bench_json(j), "");
  EXPECT_EQ(j["seeds"], json::array({0, 1}));

  r = run({"simulate", "--d", "32", "--heads", "2", "--prompt", "4", "--gen", "3", "--seeds",
           "2", "--block-size", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_EQ(validate_simulate_json(j), "");
  EXPECT_EQ(j["codecs"][0]["mean_divergence"], 0.0);

  // Same seed, same bytes.
  EXPECT_EQ(run({"bench", "--blocks", "50", "--seed", "9"}).out,
            run({"bench", "--blocks", "50", "--seed", "9"}).out);
}

TEST_F(CliTest, SchemaValidatorCatchesViolations) {
  json row = {{"block", 0}, {"n", 256},      {"skew_z", 0.1}, {"kurt_z", 0.2},
              {"k2", 0.05}, {"p_value", 0.5}, {"normal", true}};
  json bad = json::array({row});
  EXPECT_EQ(validate_normality_json(bad), "");
  bad[0]["p_value"] = 1.5;
  EXPECT_NE(validate_normality_json(bad), "");
  bad[0].erase("p_value");
  EXPECT_NE(validate_normality_json(bad), "");
  EXPECT_EQ(run({"schema", "bench"}).code, 0);
  EXPECT_EQ(run({"schema", "nope"}).code, kExitConfig);
}

TEST_F(CliTest, SynthThenAnalyze) {
  ASSERT_EQ(run({"synth", "--out", path("u.raw"), "--rows", "1", "--cols", "512", "--dist",
                 "uniform", "--seed", "3"})
                .code,
            0);
  const auto j = json::parse(
      run({"analyze", "--in", path("u.raw"), "--block-size", "512", "--alpha", "0.05"}).out);
  EXPECT_FALSE(j[0]["normal"].get<bool>());
}

}  // namespace
}  // namespace nqkv::tools
