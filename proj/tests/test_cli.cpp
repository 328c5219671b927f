#include "doctest.h"

#include "cinediff/cli.hpp"
#include "cinediff/tensorio.hpp"
#include "support.hpp"

#include "json.hpp"

#include <fstream>

using namespace cinediff;
using namespace cinediff::cli;

namespace {

RunConfig quick_config(const std::filesystem::path& out) {
  RunConfig cfg;
  cfg.out = out.string();
  cfg.bench_baseline = "count";
  cfg.bench_repeats = 1;
  return cfg;
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("default config round trip") {
  const RunConfig d;
  const std::string text = d.serialize();
  CHECK(RunConfig::parse(text) == d);
  CHECK(RunConfig::parse(text).serialize() == text);
  CHECK(d.phantom.phases == 25);
  CHECK(d.enhance.group == 3);
  CHECK(d.enhance.respace_steps == 50);
  CHECK(d.enhance.infer_steps == 10);
  CHECK(d.accel == 8);
}

TEST_CASE("non-default values survive a round trip") {
  RunConfig c;
  c.set("amplitude", "0.123456789012345");
  c.set("seed", "18446744073709551615");
  c.set("mask_scheme", "uniform_random");
  c.set("pdc", "false");
  c.set("schedule", "linear");
  c.set("weights", "/tmp/w.cdwt");
  const RunConfig back = RunConfig::parse(c.serialize());
  CHECK(back == c);
  CHECK(back.phantom.amplitude == 0.123456789012345);
  CHECK(back.enhance.seed == 18446744073709551615ULL);
}

TEST_CASE("config parsing errors name the key") {
  try {
    RunConfig::parse("rows = 32\nbogus_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  CHECK_THROWS_AS(RunConfig::parse("rows = abc"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("rows 32"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("pdc = maybe"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("schedule = sigmoid"), ConfigError);
  const RunConfig c = RunConfig::parse("# comment\n  rows = 48   # trailing\n\n");
  CHECK(c.phantom.rows == 48);
}

TEST_CASE("config validation") {
  RunConfig c;
  c.denoiser = "unet";
  CHECK_THROWS(c.validate());
  c = RunConfig{};
  c.accel = 0;
  CHECK_THROWS(c.validate());
  c = RunConfig{};
  c.enhance.eta = 0.3;
  CHECK_THROWS(c.validate());
  CHECK(run_stage("phantom", [&] { return cmd_phantom(c); }) == kInvalidConfig);
}

TEST_CASE("config hash ignores threads and output paths") {
  RunConfig a, b;
  b.enhance.threads = 8;
  b.out = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.enhance.infer_steps = 11;
  CHECK(a.hash() != b.hash());
  CHECK(a.hash_hex().size() == 16);
}

TEST_CASE("enhance without a reconstruction reports missing input") {
  testing::TempDir dir("cli_missing");
  const RunConfig cfg = quick_config(dir.path);
  CHECK(run_stage("phantom", [&] { return cmd_phantom(cfg); }) == kOk);
  CHECK(run_stage("enhance", [&] { return cmd_enhance(cfg); }) == kMissingInput);
  RunConfig tiny = cfg;
  tiny.denoiser = "tinycondnet";
  tiny.dlrecon_in = (dir / "gt.ctns").string();
  CHECK(run_stage("enhance", [&] { return cmd_enhance(tiny); }) == kMissingInput);
}

TEST_CASE("stage failures map to distinct exit codes") {
  CHECK(run_stage("x", [] { return kOk; }) == kOk);
  CHECK(run_stage("x", []() -> int { throw ConfigError("bad"); }) == kInvalidConfig);
  CHECK(run_stage("x", []() -> int { throw MissingInput("gone"); }) == kMissingInput);
  CHECK(run_stage("x", []() -> int { throw ConfigMismatch("hash"); }) == kConfigMismatch);
  CHECK(run_stage("x", []() -> int { throw std::runtime_error("boom"); }) == kStageFailed);
}

TEST_CASE("full pipeline with the oracle denoiser") {
  testing::TempDir dir("cli_pipeline");
  const RunConfig cfg = quick_config(dir.path);
  REQUIRE(cmd_pipeline(cfg) == kOk);
  for (const char* f : {"gt.ctns", "coils.ctns", "mask.ctns", "kspace.ctns", "dlrecon.ctns", "enhanced.ctns",
                        "phantom.json", "recon.json", "enhance.json", "eval.json", "eval.csv", "bench.json",
                        "bench.csv", "profile_gt.pgm", "profile_enhanced.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  }
  const auto eval = read_json(dir / "eval.json");
  CHECK(eval["psnr_enhanced"].get<double>() > eval["psnr_dlrecon"].get<double>());
  CHECK(eval["config_hash"] == cfg.hash_hex());
  CHECK(eval["version"] == version_string());

  const auto enh = read_json(dir / "enhance.json");
  CHECK(enh["stats"]["nfe"] == 90);
  CHECK(enh["stats"]["windows"] == 9);
  CHECK(enh["config"]["steps"] == "10");

  const auto bench = read_json(dir / "bench.json");
  CHECK(bench["baseline_nfe"] == 25000);
  CHECK(bench["paper_config_nfe"] == 90);
  CHECK(bench["nfe_reduction"].get<double>() == doctest::Approx(277.78).epsilon(1e-4));

  const auto k = tensorio::read_tensor(dir / "kspace.ctns");
  CHECK(k.shape == tensorio::Shape{8, 25, 64, 64});
}

TEST_CASE("eval refuses artifacts from a different config") {
  testing::TempDir dir("cli_hash");
  RunConfig cfg = quick_config(dir.path);
  cfg.phantom.rows = cfg.phantom.cols = 32;
  cfg.phantom.phases = 6;
  REQUIRE(cmd_phantom(cfg) == kOk);
  REQUIRE(cmd_recon(cfg) == kOk);
  REQUIRE(cmd_enhance(cfg) == kOk);
  RunConfig other = cfg;
  other.enhance.infer_steps = 5;
  CHECK(run_stage("eval", [&] { return cmd_eval(other); }) == kConfigMismatch);
  CHECK(run_stage("eval", [&] { return cmd_eval(other, CommandOptions{true}); }) == kOk);
  other = cfg;
  other.enhance.threads = 4;
  CHECK(run_stage("eval", [&] { return cmd_eval(other); }) == kOk);
}

TEST_CASE("stages are deterministic across runs and thread counts") {
  testing::TempDir a("cli_det_a"), b("cli_det_b");
  RunConfig ca = quick_config(a.path);
  ca.phantom.rows = ca.phantom.cols = 32;
  ca.denoiser = "gaussian";
  ca.enhance.eta = 1.0;
  RunConfig cb = ca;
  cb.out = b.path.string();
  cb.enhance.threads = 8;
  for (RunConfig* c : {&ca, &cb}) {
    REQUIRE(cmd_phantom(*c) == kOk);
    REQUIRE(cmd_recon(*c) == kOk);
    REQUIRE(cmd_enhance(*c) == kOk);
  }
  for (const char* f : {"gt.ctns", "kspace.ctns", "dlrecon.ctns", "enhanced.ctns"}) {
    CHECK_MESSAGE(tensorio::read_file(a / f) == tensorio::read_file(b / f), f);
  }
}

TEST_CASE("external initial reconstruction bypasses recon") {
  testing::TempDir dir("cli_ext");
  RunConfig cfg = quick_config(dir.path);
  cfg.phantom.rows = cfg.phantom.cols = 32;
  cfg.phantom.phases = 6;
  cfg.dlrecon_in = (dir / "gt.ctns").string();
  REQUIRE(cmd_phantom(cfg) == kOk);
  REQUIRE(cmd_enhance(cfg) == kOk);
  CHECK_FALSE(std::filesystem::exists(dir / "dlrecon.ctns"));
  REQUIRE(cmd_eval(cfg) == kOk);
  const auto eval = read_json(dir / "eval.json");
  CHECK(eval["psnr_dlrecon"] == 99.0);
}
