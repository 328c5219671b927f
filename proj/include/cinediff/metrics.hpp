#ifndef CINEDIFF_METRICS_HPP
#define CINEDIFF_METRICS_HPP

#include "cinediff/denoiser.hpp"
#include "cinediff/phantom.hpp"
#include "cinediff/sampler.hpp"
#include "cinediff/volume.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cinediff {

inline constexpr double kPsnrCap = 99.0;

// 10 log10(range^2 / MSE) over the whole video, capped at 99 dB when
// MSE < 1e-12.
double psnr(const Cine& x, const Cine& y, double data_range = 1.0);

// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03) per frame with
// symmetric boundary extension, averaged over frames.
double ssim(const RealImage& x, const RealImage& y, double data_range = 1.0);
double ssim(const Cine& x, const Cine& y, double data_range = 1.0);

// Mean |v[t+1] - v[t]| over the region and t = 0..T-2.
double temporal_gradient_energy(const Cine& video, const Roi& roi = {});

// x-t profile: row `row` of every frame, stacked [T x W].
RealImage temporal_profile(const Cine& video, Index row);

// Mean |d/dt| of a profile along one column.
double profile_temporal_variation(const RealImage& profile, Index col);

// 8-bit binary PGM (P5), linearly mapping [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, const RealImage& image, double lo, double hi);
void write_csv(const std::filesystem::path& path, const RealImage& image);

struct EvalReport {
  std::string method;
  double psnr = 0.0;
  double ssim = 0.0;
  double tge = 0.0;
};

EvalReport evaluate(const std::string& method, const Cine& video, const Cine& truth, const Roi& roi = {},
                    double data_range = 1.0);

struct BenchConfig {
  std::string label;
  int group = 3;
  int infer_steps = 10;
  int respace_steps = 50;
};

struct BenchReport {
  std::string label;
  int group = 0;
  int steps = 0;
  long long nfe = 0;
  int images = 0;
  double calls_per_image = 0.0;
  double wall_ms = 0.0;      // mean over repeats
  double wall_ms_std = 0.0;  // sample standard deviation over repeats
  std::vector<double> wall_samples;
};

// Runs each configuration `repeats` times sequentially on the same input.
std::vector<BenchReport> bench(const Cine& dlrecon, const SamplingMask& mask, std::span<const BenchConfig> configs,
                               const EnhanceConfig& base, const Denoiser& denoiser, int repeats = 5);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace cinediff

#endif  // CINEDIFF_METRICS_HPP
