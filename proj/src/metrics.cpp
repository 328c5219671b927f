#include "cinediff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace cinediff {

double psnr(const Cine& x, const Cine& y, double data_range) {
  require_same_shape(x, y, "psnr");
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be positive");
  const double mse = (x.data() - y.data()).square().mean();
  if (mse < 1e-12) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(data_range * data_range / mse));
}

namespace {

Index mirror(Index i, Index n) {
  const Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

Eigen::ArrayXd gaussian_kernel() {
  constexpr int radius = 5;
  constexpr double sigma = 1.5;
  Eigen::ArrayXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  return k / k.sum();
}

RealImage gaussian_filter(const RealImage& in) {
  static const Eigen::ArrayXd kernel = gaussian_kernel();
  const Index radius = kernel.size() / 2;
  const Index rows = in.rows();
  const Index cols = in.cols();
  RealImage tmp(rows, cols), out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Index k = -radius; k <= radius; ++k) acc += kernel[k + radius] * in(r, mirror(c + k, cols));
      tmp(r, c) = acc;
    }
  }
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Index k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp(mirror(r + k, rows), c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const RealImage& x, const RealImage& y, double data_range) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("ssim: shape mismatch");
  if (!(data_range > 0.0)) throw std::invalid_argument("ssim: data_range must be positive");
  const double c1 = std::pow(0.01 * data_range, 2);
  const double c2 = std::pow(0.03 * data_range, 2);
  const RealImage mx = gaussian_filter(x);
  const RealImage my = gaussian_filter(y);
  const RealImage sxx = gaussian_filter(x * x) - mx * mx;
  const RealImage syy = gaussian_filter(y * y) - my * my;
  const RealImage sxy = gaussian_filter(x * y) - mx * my;
  const RealImage map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

double ssim(const Cine& x, const Cine& y, double data_range) {
  require_same_shape(x, y, "ssim");
  if (x.frames() == 0) throw std::invalid_argument("ssim: empty video");
  double total = 0.0;
  for (Index t = 0; t < x.frames(); ++t) total += ssim(RealImage(x.frame(t)), RealImage(y.frame(t)), data_range);
  return total / static_cast<double>(x.frames());
}

double temporal_gradient_energy(const Cine& video, const Roi& roi) {
  if (video.frames() < 2) throw std::invalid_argument("temporal_gradient_energy: need at least two frames");
  const Index rows = roi.rows > 0 ? roi.rows : video.rows() - roi.row0;
  const Index cols = roi.cols > 0 ? roi.cols : video.cols() - roi.col0;
  if (roi.row0 < 0 || roi.col0 < 0 || rows <= 0 || cols <= 0 || roi.row0 + rows > video.rows() ||
      roi.col0 + cols > video.cols()) {
    throw std::out_of_range("temporal_gradient_energy: region outside the image");
  }
  double total = 0.0;
  for (Index t = 0; t + 1 < video.frames(); ++t) {
    total += (video.frame(t + 1).block(roi.row0, roi.col0, rows, cols) -
              video.frame(t).block(roi.row0, roi.col0, rows, cols))
                 .abs()
                 .sum();
  }
  return total / static_cast<double>((video.frames() - 1) * rows * cols);
}

RealImage temporal_profile(const Cine& video, Index row) {
  if (row < 0 || row >= video.rows()) {
    throw std::out_of_range("temporal_profile: row " + std::to_string(row) + " outside [0, " +
                            std::to_string(video.rows()) + ")");
  }
  RealImage profile(video.frames(), video.cols());
  for (Index t = 0; t < video.frames(); ++t) profile.row(t) = video.frame(t).row(row);
  return profile;
}

double profile_temporal_variation(const RealImage& profile, Index col) {
  if (col < 0 || col >= profile.cols()) throw std::out_of_range("profile_temporal_variation: column out of range");
  if (profile.rows() < 2) return 0.0;
  const Index n = profile.rows() - 1;
  return (profile.col(col).tail(n) - profile.col(col).head(n)).abs().mean();
}

void write_pgm(const std::filesystem::path& path, const RealImage& image, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("write_pgm: empty intensity window");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp((image(r, c) - lo) / (hi - lo), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
}

void write_csv(const std::filesystem::path& path, const RealImage& image) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  out.precision(9);
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) out << (c ? "," : "") << image(r, c);
    out << "\n";
  }
}

EvalReport evaluate(const std::string& method, const Cine& video, const Cine& truth, const Roi& roi,
                    double data_range) {
  return {method, psnr(video, truth, data_range), ssim(video, truth, data_range),
          temporal_gradient_energy(video, roi)};
}

std::vector<BenchReport> bench(const Cine& dlrecon, const SamplingMask& mask, std::span<const BenchConfig> configs,
                               const EnhanceConfig& base, const Denoiser& denoiser, int repeats) {
  if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
  std::vector<BenchReport> reports;
  for (const auto& bc : configs) {
    EnhanceConfig cfg = base;
    cfg.group = bc.group;
    cfg.infer_steps = bc.infer_steps;
    cfg.respace_steps = bc.respace_steps;

    BenchReport rep;
    rep.label = bc.label;
    rep.group = bc.group;
    rep.steps = bc.infer_steps;
    rep.images = static_cast<int>(dlrecon.frames());
    for (int k = 0; k < repeats; ++k) {
      const EnhanceResult r = enhance_video(dlrecon, mask, cfg, denoiser);
      if (k == 0) {
        rep.nfe = r.stats.nfe;
      } else if (r.stats.nfe != rep.nfe) {
        throw std::logic_error("bench: call count changed between repeats");
      }
      rep.wall_samples.push_back(r.stats.wall_ms);
    }
    const Eigen::Map<const Eigen::ArrayXd> w(rep.wall_samples.data(), repeats);
    rep.wall_ms = w.mean();
    rep.wall_ms_std = repeats > 1 ? std::sqrt((w - rep.wall_ms).square().sum() / (repeats - 1)) : 0.0;
    rep.calls_per_image = static_cast<double>(rep.nfe) / rep.images;
    reports.push_back(std::move(rep));
  }
  return reports;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  const auto n = static_cast<Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  a.col(0) = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  a.col(1).setOnes();
  const Eigen::Map<const Eigen::VectorXd> b(y.data(), n);
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd residual = b - a * coef;
  const double ss_tot = (b.array() - b.mean()).square().sum();
  const double ss_res = residual.squaredNorm();
  return {coef[0], coef[1], ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

}  // namespace cinediff
