#include "cinediff/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

using namespace cinediff;

int main(int argc, char** argv) {
  CLI::App app{"cinediff: diffusion enhancement of undersampled cine MRI"};
  app.set_version_flag("--version", cli::version_string());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, steps, group, accel;
  std::optional<std::string> denoiser, weights, dlrecon_in, out;
  std::vector<std::string> overrides;
  bool no_pdc = false;
  bool force = false;
  bool print_config = false;

  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "seed for phantom, mask, noise and sampler");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)");
  app.add_option("--denoiser", denoiser, "oracle | gaussian | tinycondnet | passthrough");
  app.add_option("--weights", weights, "TinyCondNet weights file");
  app.add_option("--steps", steps, "partial-diffusion steps S");
  app.add_option("--group", group, "frames per denoiser call G");
  app.add_option("--accel", accel, "acceleration factor R");
  app.add_flag("--no-pdc", no_pdc, "skip the pseudo data-consistency projection");
  app.add_option("--dlrecon-in", dlrecon_in, "use this initial reconstruction instead of out/dlrecon.ctns");
  app.add_option("--out", out, "artifact directory");
  app.add_option("--set", overrides, "override any config key: --set key=value");
  app.add_flag("--force", force, "eval: accept artifacts produced with a different config");
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  const std::pair<const char*, const char*> stages[] = {
      {"phantom", "simulate ground truth, coil maps, mask and k-space"},
      {"recon", "initial reconstruction from k-space"},
      {"enhance", "partial-diffusion enhancement of the initial reconstruction"},
      {"eval", "PSNR, SSIM, temporal gradient energy and x-t profiles"},
      {"bench", "call counts and wall time across step counts"},
      {"pipeline", "phantom, recon, enhance, eval and bench in sequence"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  cli::RunConfig cfg;
  const int code = cli::run_stage(stage, [&] {
    if (!config_path.empty()) cfg = cli::RunConfig::load(config_path);
    if (seed) cfg.set_seed(*seed);
    if (threads) cfg.enhance.threads = *threads;
    if (steps) cfg.enhance.infer_steps = *steps;
    if (group) cfg.enhance.group = *group;
    if (accel) cfg.accel = *accel;
    if (denoiser) cfg.denoiser = *denoiser;
    if (weights) cfg.weights = *weights;
    if (dlrecon_in) cfg.dlrecon_in = *dlrecon_in;
    if (out) cfg.out = *out;
    if (no_pdc) cfg.enhance.pdc = false;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    if (print_config) {
      std::cout << cfg.serialize();
      return 0;
    }
    return 0;
  });
  if (code != cli::kOk || print_config) return code;

  const cli::CommandOptions opts{force};
  if (stage == "pipeline") return cli::cmd_pipeline(cfg, opts);
  return cli::run_stage(stage, [&] {
    if (stage == "phantom") return cli::cmd_phantom(cfg);
    if (stage == "recon") return cli::cmd_recon(cfg);
    if (stage == "enhance") return cli::cmd_enhance(cfg);
    if (stage == "eval") return cli::cmd_eval(cfg, opts);
    return cli::cmd_bench(cfg);
  });
}
