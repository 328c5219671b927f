#ifndef CINEDIFF_CLI_HPP
#define CINEDIFF_CLI_HPP

// Run configuration and the stage commands behind the `cinediff` tool.
// Every stage reads and writes TensorFiles under the output directory and
// leaves a JSON sidecar carrying the config hash and tool version.

#include "cinediff/initialrecon.hpp"
#include "cinediff/phantom.hpp"
#include "cinediff/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace cinediff::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 2,
  kMissingInput = 3,
  kStageFailed = 4,
  kConfigMismatch = 5,
};

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  PhantomConfig phantom;
  int accel = 8;
  int center_lines = 4;
  MaskScheme mask_scheme = MaskScheme::Lattice;
  ReconKind recon = ReconKind::ViewShare;
  int share_radius = 4;
  EnhanceConfig enhance;
  std::string denoiser = "oracle";
  double gaussian_mu0 = 0.0;
  double gaussian_var0 = 0.25;
  std::string weights;
  std::string dlrecon_in;
  std::string out = "run";
  int profile_row = -1;  // -1: row through the heart centre
  int bench_repeats = 5;
  std::string bench_baseline = "run";  // run | count

  std::uint64_t seed() const { return phantom.seed; }
  void set_seed(std::uint64_t s) {
    phantom.seed = s;
    enhance.seed = s;
  }

  void validate() const;

  std::map<std::string, std::string> to_map() const;
  static RunConfig from_map(const std::map<std::string, std::string>& values);

  // "key = value" lines, sorted by key; '#' starts a comment.
  std::string serialize() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);

  // FNV-1a over the serialized result-affecting fields (threads, out and
  // bench settings excluded).
  std::uint64_t hash() const;
  std::string hash_hex() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_map() == b.to_map(); }
};

std::string version_string();

struct CommandOptions {
  bool force = false;
};

int cmd_phantom(const RunConfig& cfg);
int cmd_recon(const RunConfig& cfg);
int cmd_enhance(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg, const CommandOptions& opts = {});
int cmd_bench(const RunConfig& cfg);
int cmd_pipeline(const RunConfig& cfg, const CommandOptions& opts = {});

// Runs a stage, converting exceptions into exit codes with a diagnostic on
// stderr that names the stage.
int run_stage(const std::string& stage, const std::function<int()>& body);

}  // namespace cinediff::cli

#endif  // CINEDIFF_CLI_HPP
