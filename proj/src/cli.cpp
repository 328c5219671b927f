#include "cinediff/cli.hpp"

#include "cinediff/metrics.hpp"
#include "cinediff/operators.hpp"
#include "cinediff/tensorio.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#ifndef CINEDIFF_VERSION
#define CINEDIFF_VERSION "0.1.0"
#endif

namespace cinediff::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return CINEDIFF_VERSION; }

// ---------------------------------------------------------------------------
// Config

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

// Keys that do not change any produced tensor.
bool hash_excluded(const std::string& key) {
  return key == "threads" || key == "out" || key == "bench_repeats" || key == "bench_baseline" ||
         key == "profile_row";
}

}  // namespace

void RunConfig::validate() const {
  phantom.validate();
  try {
    enhance.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  if (accel < 1 || accel > phantom.rows) throw ConfigError("accel must lie in [1, rows]");
  if (center_lines < 0 || center_lines % 2 != 0 || center_lines > phantom.rows / 4) {
    throw ConfigError("center_lines must be even and <= rows/4");
  }
  if (share_radius < 0) throw ConfigError("share_radius must be >= 0");
  if (denoiser != "oracle" && denoiser != "gaussian" && denoiser != "tinycondnet" && denoiser != "passthrough") {
    throw ConfigError("unknown denoiser '" + denoiser + "'");
  }
  if (!(gaussian_var0 > 0.0)) throw ConfigError("gaussian_var0 must be positive");
  if (profile_row >= phantom.rows) throw ConfigError("profile_row outside the image");
  if (bench_repeats < 1) throw ConfigError("bench_repeats must be >= 1");
  if (bench_baseline != "run" && bench_baseline != "count") throw ConfigError("bench_baseline must be run or count");
}

std::map<std::string, std::string> RunConfig::to_map() const {
  return {
      {"rows", std::to_string(phantom.rows)},
      {"cols", std::to_string(phantom.cols)},
      {"phases", std::to_string(phantom.phases)},
      {"coils", std::to_string(phantom.coils)},
      {"amplitude", format_double(phantom.amplitude)},
      {"noise_sigma", format_double(phantom.noise_sigma)},
      {"inner_radius", format_double(phantom.inner_radius)},
      {"outer_radius", format_double(phantom.outer_radius)},
      {"seed", std::to_string(phantom.seed)},
      {"accel", std::to_string(accel)},
      {"center_lines", std::to_string(center_lines)},
      {"mask_scheme", to_string(mask_scheme)},
      {"recon", to_string(recon)},
      {"share_radius", std::to_string(share_radius)},
      {"schedule", to_string(enhance.schedule)},
      {"train_steps", std::to_string(enhance.train_steps)},
      {"s_offset", format_double(enhance.s_offset)},
      {"respace_steps", std::to_string(enhance.respace_steps)},
      {"steps", std::to_string(enhance.infer_steps)},
      {"group", std::to_string(enhance.group)},
      {"eta", format_double(enhance.eta)},
      {"pdc", enhance.pdc ? "true" : "false"},
      {"percentile", format_double(enhance.percentile)},
      {"threads", std::to_string(enhance.threads)},
      {"denoiser", denoiser},
      {"gaussian_mu0", format_double(gaussian_mu0)},
      {"gaussian_var0", format_double(gaussian_var0)},
      {"weights", weights},
      {"dlrecon_in", dlrecon_in},
      {"out", out},
      {"profile_row", std::to_string(profile_row)},
      {"bench_repeats", std::to_string(bench_repeats)},
      {"bench_baseline", bench_baseline},
  };
}

void RunConfig::set(const std::string& key, const std::string& v) {
  if (key == "rows") phantom.rows = parse_number<int>(key, v);
  else if (key == "cols") phantom.cols = parse_number<int>(key, v);
  else if (key == "phases") phantom.phases = parse_number<int>(key, v);
  else if (key == "coils") phantom.coils = parse_number<int>(key, v);
  else if (key == "amplitude") phantom.amplitude = parse_number<double>(key, v);
  else if (key == "noise_sigma") phantom.noise_sigma = parse_number<double>(key, v);
  else if (key == "inner_radius") phantom.inner_radius = parse_number<double>(key, v);
  else if (key == "outer_radius") phantom.outer_radius = parse_number<double>(key, v);
  else if (key == "seed") set_seed(parse_number<std::uint64_t>(key, v));
  else if (key == "accel") accel = parse_number<int>(key, v);
  else if (key == "center_lines") center_lines = parse_number<int>(key, v);
  else if (key == "mask_scheme") mask_scheme = parse_mask_scheme(v);
  else if (key == "recon") {
    try {
      recon = parse_recon_kind(v);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  } else if (key == "share_radius") share_radius = parse_number<int>(key, v);
  else if (key == "schedule") {
    try {
      enhance.schedule = parse_schedule_kind(v);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  } else if (key == "train_steps") enhance.train_steps = parse_number<int>(key, v);
  else if (key == "s_offset") enhance.s_offset = parse_number<double>(key, v);
  else if (key == "respace_steps") enhance.respace_steps = parse_number<int>(key, v);
  else if (key == "steps") enhance.infer_steps = parse_number<int>(key, v);
  else if (key == "group") enhance.group = parse_number<int>(key, v);
  else if (key == "eta") enhance.eta = parse_number<double>(key, v);
  else if (key == "pdc") enhance.pdc = parse_bool(key, v);
  else if (key == "percentile") enhance.percentile = parse_number<double>(key, v);
  else if (key == "threads") enhance.threads = parse_number<int>(key, v);
  else if (key == "denoiser") denoiser = v;
  else if (key == "gaussian_mu0") gaussian_mu0 = parse_number<double>(key, v);
  else if (key == "gaussian_var0") gaussian_var0 = parse_number<double>(key, v);
  else if (key == "weights") weights = v;
  else if (key == "dlrecon_in") dlrecon_in = v;
  else if (key == "out") out = v;
  else if (key == "profile_row") profile_row = parse_number<int>(key, v);
  else if (key == "bench_repeats") bench_repeats = parse_number<int>(key, v);
  else if (key == "bench_baseline") bench_baseline = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& values) {
  RunConfig cfg;
  for (const auto& [k, v] : values) cfg.set(k, v);
  return cfg;
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : to_map()) os << k << " = " << v << "\n";
  return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("config file " + path.string() + " not found");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : to_map()) {
    if (hash_excluded(k)) continue;
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

// ---------------------------------------------------------------------------
// Stage helpers

namespace {

fs::path out_dir(const RunConfig& cfg) { return fs::path(cfg.out); }

fs::path require_file(const fs::path& p, const std::string& produced_by) {
  if (!fs::exists(p)) {
    throw MissingInput("missing input " + p.string() + " (run `" + produced_by + "` first or pass it explicitly)");
  }
  return p;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.to_map()) j[k] = v;
  return j;
}

json sidecar(const std::string& stage, const RunConfig& cfg) {
  return {{"stage", stage}, {"version", version_string()}, {"config_hash", cfg.hash_hex()}, {"config", config_json(cfg)}};
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot create " + p.string());
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw MissingInput("missing sidecar " + p.string());
  return json::parse(in);
}

SamplingMask load_mask(const RunConfig& cfg) {
  const auto t = tensorio::read_tensor(require_file(out_dir(cfg) / "mask.ctns", "phantom"));
  if (t.dtype() != tensorio::DType::U8 || t.shape.size() != 2) throw std::runtime_error("mask.ctns is not u8 [T, H]");
  const auto& v = std::get<std::vector<std::uint8_t>>(t.values);
  SamplingMask::Pattern p(static_cast<Index>(t.shape[0]), static_cast<Index>(t.shape[1]));
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = v[static_cast<std::size_t>(i)] != 0;
  return SamplingMask(std::move(p), cfg.accel, cfg.center_lines, cfg.mask_scheme);
}

Cine load_dlrecon_for(const RunConfig& cfg) {
  if (!cfg.dlrecon_in.empty()) return load_dlrecon(require_file(cfg.dlrecon_in, "recon"));
  return load_dlrecon(require_file(out_dir(cfg) / "dlrecon.ctns", "recon"));
}

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& cfg) {
  if (cfg.denoiser == "oracle") {
    return std::make_unique<OracleDenoiser>(
        tensorio::to_cine(tensorio::read_tensor(require_file(out_dir(cfg) / "gt.ctns", "phantom"))));
  }
  if (cfg.denoiser == "gaussian") return std::make_unique<GaussianPriorDenoiser>(cfg.gaussian_mu0, cfg.gaussian_var0);
  if (cfg.denoiser == "passthrough") return std::make_unique<PassthroughDenoiser>();
  if (cfg.weights.empty()) throw MissingInput("denoiser tinycondnet needs --weights <file>");
  return std::make_unique<TinyCondNet>(TinyCondNet::load(require_file(cfg.weights, "trainer"), cfg.enhance.group));
}

Index profile_row_for(const RunConfig& cfg) {
  if (cfg.profile_row >= 0) return cfg.profile_row;
  const auto g = phantom_geometry(cfg.phantom);
  return std::clamp<Index>(static_cast<Index>(std::lround(g.heart_row)), 0, cfg.phantom.rows - 1);
}

json stats_json(const RunStats& s) {
  return {{"nfe", s.nfe}, {"windows", s.windows}, {"steps", s.steps}, {"frames", s.frames}, {"wall_ms", s.wall_ms}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

int cmd_phantom(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(out_dir(cfg));
  const Cine gt = generate_phantom(cfg.phantom);
  const ComplexVolume coils = generate_coils(cfg.phantom.rows, cfg.phantom.cols, cfg.phantom.coils, cfg.seed());
  const SamplingMask mask =
      generate_mask(cfg.phantom.phases, cfg.phantom.rows, cfg.accel, cfg.center_lines, cfg.mask_scheme, cfg.seed());
  const KSpaceData k = simulate_kspace(gt, coils, mask, cfg.phantom.noise_sigma, cfg.seed());

  const fs::path dir = out_dir(cfg);
  tensorio::write_tensor(dir / "gt.ctns", tensorio::to_tensor(gt));
  tensorio::write_tensor(dir / "coils.ctns", tensorio::to_tensor(coils));
  tensorio::write_tensor(dir / "mask.ctns", tensorio::to_tensor(mask));
  tensorio::write_tensor(dir / "kspace.ctns", tensorio::to_tensor(k.coils));

  const auto geom = phantom_geometry(cfg.phantom);
  json j = sidecar("phantom", cfg);
  j["pixel_spacing_mm"] = {cfg.phantom.pixel_spacing_mm, cfg.phantom.pixel_spacing_mm};
  j["mask"] = {{"acceleration", mask.acceleration()},
               {"center_lines", mask.center_lines()},
               {"scheme", to_string(mask.scheme())},
               {"effective_acceleration", mask.effective_acceleration()}};
  j["geometry"] = {{"heart_row", geom.heart_row},
                   {"heart_col", geom.heart_col},
                   {"inner_radius", geom.inner_radius},
                   {"outer_radius", geom.outer_radius}};
  write_json(dir / "phantom.json", j);
  return kOk;
}

int cmd_recon(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = out_dir(cfg);
  KSpaceData k;
  k.coils = tensorio::to_coil_stack(tensorio::read_tensor(require_file(dir / "kspace.ctns", "phantom")));
  k.mask = load_mask(cfg);
  const InitialReconstructor recon{cfg.recon, cfg.share_radius};
  const Cine dl = recon(k);
  tensorio::write_tensor(dir / "dlrecon.ctns", tensorio::to_tensor(dl));
  json j = sidecar("recon", cfg);
  j["reconstructor"] = to_string(cfg.recon);
  write_json(dir / "recon.json", j);
  return kOk;
}

int cmd_enhance(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = out_dir(cfg);
  const Cine dl = load_dlrecon_for(cfg);
  const SamplingMask mask = load_mask(cfg);
  const auto denoiser = make_denoiser(cfg);
  fs::create_directories(dir);
  const EnhanceResult r = enhance_video(dl, mask, cfg.enhance, *denoiser);
  tensorio::write_tensor(dir / "enhanced.ctns", tensorio::to_tensor(r.enhanced));
  json j = sidecar("enhance", cfg);
  j["stats"] = stats_json(r.stats);
  j["denoiser"] = denoiser->name();
  j["normalization_scale"] = r.normalization.scale;
  j["dlrecon_source"] = cfg.dlrecon_in.empty() ? (dir / "dlrecon.ctns").string() : cfg.dlrecon_in;
  write_json(dir / "enhance.json", j);
  std::cout << "enhance: nfe=" << r.stats.nfe << " windows=" << r.stats.windows << " steps=" << r.stats.steps
            << " wall_ms=" << r.stats.wall_ms << "\n";
  return kOk;
}

int cmd_eval(const RunConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  const fs::path dir = out_dir(cfg);
  const std::string expected = cfg.hash_hex();
  for (const char* name : {"phantom.json", "recon.json", "enhance.json"}) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    const std::string found = read_json(p).at("config_hash").get<std::string>();
    if (found != expected && !opts.force) {
      throw ConfigMismatch(std::string(name) + " was produced with config hash " + found + " but the current config is " +
                           expected + " (use --force to evaluate anyway)");
    }
  }

  const Cine gt = tensorio::to_cine(tensorio::read_tensor(require_file(dir / "gt.ctns", "phantom")));
  const Cine dl = load_dlrecon_for(cfg);
  const Cine enhanced = tensorio::to_cine(tensorio::read_tensor(require_file(dir / "enhanced.ctns", "enhance")));
  const Roi roi = heart_roi(phantom_geometry(cfg.phantom), cfg.phantom.rows, cfg.phantom.cols);

  const std::vector<EvalReport> reports = {evaluate("ground_truth", gt, gt, roi), evaluate("dlrecon", dl, gt, roi),
                                           evaluate("enhanced", enhanced, gt, roi)};
  json j = sidecar("eval", cfg);
  j["roi"] = {roi.row0, roi.col0, roi.rows, roi.cols};
  std::ofstream csv(dir / "eval.csv");
  csv << "method,psnr_db,ssim,tge\n";
  for (const auto& r : reports) {
    j["reports"].push_back({{"method", r.method}, {"psnr", r.psnr}, {"ssim", r.ssim}, {"tge", r.tge}});
    csv << r.method << "," << r.psnr << "," << r.ssim << "," << r.tge << "\n";
  }
  j["psnr_dlrecon"] = reports[1].psnr;
  j["psnr_enhanced"] = reports[2].psnr;

  const Index row = profile_row_for(cfg);
  j["profile_row"] = row;
  const std::pair<const char*, const Cine*> videos[] = {{"gt", &gt}, {"dlrecon", &dl}, {"enhanced", &enhanced}};
  for (const auto& [label, video] : videos) {
    const RealImage prof = temporal_profile(*video, row);
    write_pgm(dir / (std::string("profile_") + label + ".pgm"), prof, 0.0, 1.0);
    write_csv(dir / (std::string("profile_") + label + ".csv"), prof);
  }
  write_json(dir / "eval.json", j);
  for (const auto& r : reports) {
    std::cout << "eval: " << r.method << " psnr=" << r.psnr << " ssim=" << r.ssim << " tge=" << r.tge << "\n";
  }
  return kOk;
}

int cmd_bench(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = out_dir(cfg);
  const Cine dl = load_dlrecon_for(cfg);
  const SamplingMask mask = load_mask(cfg);
  const auto denoiser = make_denoiser(cfg);

  const int k = cfg.enhance.respace_steps;
  std::vector<BenchConfig> sweep;
  for (int s : {5, 10, 20, 50}) {
    if (s <= k) sweep.push_back({"mimo_g" + std::to_string(cfg.enhance.group) + "_s" + std::to_string(s),
                                 cfg.enhance.group, s, k});
  }
  std::vector<BenchReport> reports = bench(dl, mask, sweep, cfg.enhance, *denoiser, cfg.bench_repeats);

  const int T = static_cast<int>(dl.frames());
  const int baseline_steps = cfg.enhance.train_steps;
  BenchReport baseline;
  if (cfg.bench_baseline == "run") {
    const BenchConfig bc{"per_frame_full_ddpm", 1, baseline_steps, baseline_steps};
    baseline = bench(dl, mask, std::span(&bc, 1), cfg.enhance, *denoiser, 1).front();
  } else {
    baseline.label = "per_frame_full_ddpm";
    baseline.group = 1;
    baseline.steps = baseline_steps;
    baseline.images = T;
    baseline.nfe = expected_nfe(T, 1, baseline_steps);
    baseline.calls_per_image = static_cast<double>(baseline.nfe) / T;
    baseline.wall_ms = std::numeric_limits<double>::quiet_NaN();
  }

  std::vector<double> nfe, wall;
  for (const auto& r : reports) {
    for (double w : r.wall_samples) {
      nfe.push_back(static_cast<double>(r.nfe));
      wall.push_back(w);
    }
  }
  const LinearFit fit = nfe.size() >= 2 ? fit_line(nfe, wall) : LinearFit{};

  const BenchReport* paper = nullptr;
  for (const auto& r : reports) {
    if (r.steps == cfg.enhance.infer_steps) paper = &r;
  }
  const long long paper_nfe = paper ? paper->nfe : expected_nfe(T, cfg.enhance.group, cfg.enhance.infer_steps);

  json j = sidecar("bench", cfg);
  std::ofstream csv(dir / "bench.csv");
  csv << "label,group,steps,nfe,images,calls_per_image,wall_ms_mean,wall_ms_std\n";
  auto emit = [&](const BenchReport& r) {
    json wall_j = std::isnan(r.wall_ms) ? json(nullptr) : json(r.wall_ms);
    j["reports"].push_back({{"label", r.label},
                            {"group", r.group},
                            {"steps", r.steps},
                            {"nfe", r.nfe},
                            {"images", r.images},
                            {"calls_per_image", r.calls_per_image},
                            {"wall_ms", wall_j},
                            {"wall_ms_std", r.wall_ms_std},
                            {"wall_samples_ms", r.wall_samples}});
    csv << r.label << "," << r.group << "," << r.steps << "," << r.nfe << "," << r.images << "," << r.calls_per_image
        << "," << r.wall_ms << "," << r.wall_ms_std << "\n";
    std::cout << "bench: " << r.label << " nfe=" << r.nfe << " wall_ms=" << r.wall_ms << "\n";
  };
  for (const auto& r : reports) emit(r);
  emit(baseline);
  const double ratio = static_cast<double>(baseline.nfe) / static_cast<double>(paper_nfe);
  j["nfe_reduction"] = ratio;
  j["paper_config_nfe"] = paper_nfe;
  j["baseline_nfe"] = baseline.nfe;
  j["timing_fit"] = {{"slope_ms_per_call", fit.slope}, {"intercept_ms", fit.intercept}, {"r_squared", fit.r_squared}};
  write_json(dir / "bench.json", j);
  std::cout << "bench: nfe reduction " << baseline.nfe << "/" << paper_nfe << " = " << ratio
            << "x, timing fit R^2 = " << fit.r_squared << "\n";
  return kOk;
}

int cmd_pipeline(const RunConfig& cfg, const CommandOptions& opts) {
  const std::pair<const char*, std::function<int()>> stages[] = {
      {"phantom", [&] { return cmd_phantom(cfg); }},
      {"recon", [&] { return cmd_recon(cfg); }},
      {"enhance", [&] { return cmd_enhance(cfg); }},
      {"eval", [&] { return cmd_eval(cfg, opts); }},
      {"bench", [&] { return cmd_bench(cfg); }},
  };
  for (const auto& [name, body] : stages) {
    if (cfg.dlrecon_in.size() && std::string(name) == "recon") continue;
    const int code = run_stage(name, body);
    if (code != kOk) return code;
  }
  return kOk;
}

int run_stage(const std::string& stage, const std::function<int()>& body) {
  try {
    return body();
  } catch (const MissingInput& ex) {
    std::cerr << "cinediff " << stage << ": missing input: " << ex.what() << "\n";
    return kMissingInput;
  } catch (const ConfigMismatch& ex) {
    std::cerr << "cinediff " << stage << ": config mismatch: " << ex.what() << "\n";
    return kConfigMismatch;
  } catch (const ConfigError& ex) {
    std::cerr << "cinediff " << stage << ": invalid config: " << ex.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& ex) {
    std::cerr << "cinediff " << stage << ": failed: " << ex.what() << "\n";
    return kStageFailed;
  }
}

}  // namespace cinediff::cli
