#include "cinediff/phantom.hpp"

#include "cinediff/operators.hpp"
#include "cinediff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace cinediff {

void PhantomConfig::validate() const {
  if (rows < 16 || cols < 16) throw ConfigError("phantom: rows and cols must be >= 16");
  if (phases < 3) throw ConfigError("phantom: phases must be >= 3");
  if (coils < 1) throw ConfigError("phantom: coils must be >= 1");
  if (!(amplitude >= 0.0 && amplitude < 0.5)) throw ConfigError("phantom: amplitude must lie in [0, 0.5)");
  if (!(noise_sigma >= 0.0)) throw ConfigError("phantom: noise_sigma must be >= 0");
  if (!(inner_radius > 0.0)) throw ConfigError("phantom: inner radius must be positive");
  if (!(outer_radius > inner_radius)) {
    throw ConfigError("phantom: degenerate annulus, outer radius must exceed inner radius");
  }
  if (outer_radius > 0.3) throw ConfigError("phantom: annulus does not fit inside the torso");
}

bool Ellipse::contains(double r, double c) const {
  const double dr = (r - center_row) / semi_rows;
  const double dc = (c - center_col) / semi_cols;
  return dr * dr + dc * dc <= 1.0;
}

double PhantomGeometry::inner_radius_at(double t) const {
  const double phase = 2.0 * std::numbers::pi * t / static_cast<double>(phases);
  return inner_radius * (1.0 - amplitude * (1.0 - std::cos(phase)) / 2.0);
}

PhantomGeometry phantom_geometry(const PhantomConfig& cfg) {
  cfg.validate();
  const double h = cfg.rows;
  const double w = cfg.cols;
  const double m = std::min(h, w);
  const double cr = h / 2.0;
  const double cc = w / 2.0;

  auto rng = substream(cfg.seed, StreamTag::PhantomGeometry);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  auto j = [&](double scale) { return scale * jitter(rng); };

  PhantomGeometry g{};
  g.torso = {cr, cc, 0.42 * h, 0.46 * w, 0.3};
  g.organs = {
      {cr + 0.20 * h + j(0.02 * h), cc - 0.22 * w + j(0.02 * w), 0.09 * h, 0.07 * w, 0.5},
      {cr - 0.22 * h + j(0.02 * h), cc + 0.20 * w + j(0.02 * w), 0.07 * h, 0.08 * w, 0.7},
  };
  g.heart_row = cr - 0.02 * h + j(0.015 * h);
  g.heart_col = cc + 0.04 * w + j(0.015 * w);
  g.inner_radius = cfg.inner_radius * m;
  g.outer_radius = cfg.outer_radius * m;
  g.amplitude = cfg.amplitude;
  g.phases = cfg.phases;
  g.blood_intensity = 1.0;
  g.myocardium_intensity = 0.15;
  return g;
}

Roi heart_roi(const PhantomGeometry& g, int rows, int cols, double margin) {
  const double r = g.outer_radius + margin;
  auto clampi = [](double v, int hi) { return std::clamp(static_cast<int>(std::floor(v)), 0, hi); };
  const int r0 = clampi(g.heart_row - r, rows - 1);
  const int r1 = clampi(g.heart_row + r + 1, rows);
  const int c0 = clampi(g.heart_col - r, cols - 1);
  const int c1 = clampi(g.heart_col + r + 1, cols);
  return {r0, c0, r1 - r0, c1 - c0};
}

namespace {

// Intensity at a sub-pixel sample; later structures paint over earlier ones.
double intensity_at(const PhantomGeometry& g, double r_in, double y, double x) {
  double v = 0.0;
  if (g.torso.contains(y, x)) v = g.torso.intensity;
  for (const auto& e : g.organs) {
    if (e.contains(y, x)) v = e.intensity;
  }
  const double d = std::hypot(y - g.heart_row, x - g.heart_col);
  if (d < g.outer_radius) v = d < r_in ? g.blood_intensity : g.myocardium_intensity;
  return v;
}

}  // namespace

Cine generate_phantom(const PhantomConfig& cfg) {
  const PhantomGeometry g = phantom_geometry(cfg);
  constexpr int kSuper = 4;
  Cine video(cfg.phases, cfg.rows, cfg.cols);
  for (int t = 0; t < cfg.phases; ++t) {
    const double r_in = g.inner_radius_at(t);
    auto frame = video.frame(t);
    for (int y = 0; y < cfg.rows; ++y) {
      for (int x = 0; x < cfg.cols; ++x) {
        double acc = 0.0;
        for (int sy = 0; sy < kSuper; ++sy) {
          for (int sx = 0; sx < kSuper; ++sx) {
            acc += intensity_at(g, r_in, y + (sy + 0.5) / kSuper, x + (sx + 0.5) / kSuper);
          }
        }
        frame(y, x) = acc / (kSuper * kSuper);
      }
    }
  }
  return video;
}

ComplexVolume generate_coils(int rows, int cols, int coils, std::uint64_t seed) {
  if (coils < 1) throw std::invalid_argument("generate_coils: need at least one coil");
  if (rows < 1 || cols < 1) throw std::invalid_argument("generate_coils: empty image");
  const double m = std::min(rows, cols);
  const double ring = 0.6 * m / 2.0;
  const double sigma = 0.4 * m;
  const double cr = rows / 2.0;
  const double cc = cols / 2.0;

  ComplexVolume maps(coils, rows, cols);
  for (int c = 0; c < coils; ++c) {
    auto rng = substream(seed, StreamTag::CoilPhase, {static_cast<std::uint64_t>(c)});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double slope_r = std::numbers::pi * u(rng);
    const double slope_c = std::numbers::pi * u(rng);
    const double offset = std::numbers::pi * u(rng);

    const double angle = 2.0 * std::numbers::pi * c / coils;
    const double pr = cr + ring * std::sin(angle);
    const double pc = cc + ring * std::cos(angle);
    auto map = maps.frame(c);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        const double d2 = (y - pr) * (y - pr) + (x - pc) * (x - pc);
        const double mag = std::exp(-d2 / (2.0 * sigma * sigma));
        const double phase = offset + slope_r * (y - cr) / rows + slope_c * (x - cc) / cols;
        map(y, x) = std::polar(mag, phase);
      }
    }
  }
  const RealImage rss = rss_combine(maps);
  const Eigen::Array<double, 1, Eigen::Dynamic> inv =
      Eigen::Map<const Eigen::Array<double, 1, Eigen::Dynamic>>(rss.data(), rss.size()).inverse();
  for (int c = 0; c < coils; ++c) maps.data().row(c) *= inv.cast<cdouble>();
  return maps;
}

std::string to_string(MaskScheme scheme) {
  return scheme == MaskScheme::Lattice ? "lattice" : "uniform_random";
}

MaskScheme parse_mask_scheme(const std::string& name) {
  if (name == "lattice") return MaskScheme::Lattice;
  if (name == "uniform_random") return MaskScheme::UniformRandom;
  throw ConfigError("unknown mask scheme '" + name + "'");
}

SamplingMask::SamplingMask(Pattern pattern, int acceleration, int center_lines, MaskScheme scheme)
    : pattern_(std::move(pattern)), acceleration_(acceleration), center_lines_(center_lines), scheme_(scheme) {}

double SamplingMask::effective_acceleration() const {
  const Index n = sampled_count();
  if (n == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(pattern_.size()) / static_cast<double>(n);
}

SamplingMask SamplingMask::full(Index frames, Index lines) {
  return SamplingMask(Pattern::Constant(frames, lines, true), 1, 0, MaskScheme::Lattice);
}

std::pair<int, int> center_block(int lines, int center_lines) {
  const int begin = lines / 2 - center_lines / 2;
  return {begin, begin + center_lines};
}

SamplingMask generate_mask(int frames, int lines, int acceleration, int center_lines, MaskScheme scheme,
                           std::uint64_t seed) {
  if (frames < 1 || lines < 1) throw std::invalid_argument("generate_mask: empty mask");
  if (acceleration < 1) throw std::invalid_argument("generate_mask: acceleration must be >= 1");
  if (acceleration > lines) {
    throw std::invalid_argument("generate_mask: acceleration " + std::to_string(acceleration) +
                                " exceeds line count " + std::to_string(lines));
  }
  if (center_lines < 0 || center_lines % 2 != 0 || center_lines > lines / 4) {
    throw std::invalid_argument("generate_mask: center lines must be even and <= lines/4");
  }

  SamplingMask::Pattern pattern = SamplingMask::Pattern::Constant(frames, lines, false);
  const auto [c0, c1] = center_block(lines, center_lines);
  const int per_frame = (lines + acceleration - 1) / acceleration;
  for (int t = 0; t < frames; ++t) {
    if (scheme == MaskScheme::Lattice) {
      for (int ky = 0; ky < lines; ++ky) pattern(t, ky) = ky % acceleration == t % acceleration;
    } else {
      auto rng = substream(seed, StreamTag::MaskLines, {static_cast<std::uint64_t>(t)});
      std::vector<int> all(static_cast<std::size_t>(lines));
      std::iota(all.begin(), all.end(), 0);
      std::vector<int> picked;
      std::sample(all.begin(), all.end(), std::back_inserter(picked), per_frame, rng);
      for (int ky : picked) pattern(t, ky) = true;
    }
    for (int ky = c0; ky < c1; ++ky) pattern(t, ky) = true;
  }
  return SamplingMask(std::move(pattern), acceleration, center_lines, scheme);
}

KSpaceData simulate_kspace(const Cine& truth, const ComplexVolume& coil_maps, const SamplingMask& mask,
                           double noise_sigma, std::uint64_t seed) {
  if (coil_maps.rows() != truth.rows() || coil_maps.cols() != truth.cols()) {
    throw std::invalid_argument("simulate_kspace: coil maps and images differ in size");
  }
  if (mask.frames() != truth.frames() || mask.lines() != truth.rows()) {
    throw std::invalid_argument("simulate_kspace: mask shape does not match the video");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("simulate_kspace: negative noise");

  KSpaceData out;
  out.mask = mask;
  out.coils.reserve(static_cast<std::size_t>(coil_maps.frames()));
  for (Index c = 0; c < coil_maps.frames(); ++c) {
    ComplexVolume k(truth.frames(), truth.rows(), truth.cols());
    for (Index t = 0; t < truth.frames(); ++t) {
      ComplexImage img = truth.frame(t).cast<cdouble>() * coil_maps.frame(c);
      auto kt = k.frame(t);
      kt = fft2c(img);
      if (noise_sigma > 0.0) {
        // Circular complex noise, E|n|^2 = noise_sigma^2.
        auto rng = substream(seed, StreamTag::KSpaceNoise,
                             {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(t)});
        std::normal_distribution<double> normal(0.0, noise_sigma / std::numbers::sqrt2);
        for (Index y = 0; y < kt.rows(); ++y) {
          for (Index x = 0; x < kt.cols(); ++x) {
            const double re = normal(rng);
            const double im = normal(rng);
            kt(y, x) += cdouble(re, im);
          }
        }
      }
    }
    apply_mask(k, mask);
    out.coils.push_back(std::move(k));
  }
  return out;
}

}  // namespace cinediff
