#ifndef CINEDIFF_TESTS_SUPPORT_HPP
#define CINEDIFF_TESTS_SUPPORT_HPP

#include "cinediff/operators.hpp"
#include "cinediff/phantom.hpp"
#include "cinediff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace testing {

using namespace cinediff;

inline Cine random_cine(Index frames, Index rows, Index cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Cine v(frames, rows, cols);
  for (Index i = 0; i < v.size(); ++i) v.data().data()[i] = u(rng);
  return v;
}

inline ComplexImage random_complex(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  ComplexImage img(rows, cols);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = {n(rng), n(rng)};
  return img;
}

// Direct O(N^2) centered orthonormal DFT, independent of the FFT path.
inline ComplexImage direct_dft2c(const ComplexImage& x) {
  const Index h = x.rows(), w = x.cols();
  ComplexImage out(h, w);
  const double pi = 3.14159265358979323846;
  for (Index ky = 0; ky < h; ++ky) {
    for (Index kx = 0; kx < w; ++kx) {
      cdouble acc = 0.0;
      for (Index r = 0; r < h; ++r) {
        for (Index c = 0; c < w; ++c) {
          const double phase = -2.0 * pi *
                               (static_cast<double>((ky - h / 2) * (r - h / 2)) / h +
                                static_cast<double>((kx - w / 2) * (c - w / 2)) / w);
          acc += x(r, c) * std::polar(1.0, phase);
        }
      }
      out(ky, kx) = acc / std::sqrt(static_cast<double>(h * w));
    }
  }
  return out;
}

// gt plus a real perturbation whose k-space vanishes on every sampled line
// and on the conjugate-mirror of every sampled line, so that the result
// agrees with gt on the acquired data while differing elsewhere.
inline Cine consistent_degradation(const Cine& gt, const SamplingMask& mask, double amplitude, std::uint64_t seed) {
  Cine out = gt;
  const Index h = gt.rows();
  for (Index t = 0; t < gt.frames(); ++t) {
    ComplexImage k = random_complex(h, gt.cols(), seed + static_cast<std::uint64_t>(t)) * amplitude;
    for (Index l = 0; l < h; ++l) {
      const Index mirror = (h - l) % h;
      if (mask.sampled(t, l) || mask.sampled(t, mirror)) k.row(l).setZero();
    }
    out.frame(t) += ifft2c(k).real();
  }
  return out;
}

// Exact output variance of the K-step ancestral chain (eta = 1, posterior
// variance noise) driven by the analytic predictor for a N(mu0, var0) prior,
// started from pure noise. The chain is linear-Gaussian, so the variance
// follows a scalar recursion. The cosine schedule is rebuilt here from its
// closed form.
inline double gaussian_chain_variance(int count, double var0, int steps = 1000, double s = 0.008) {
  const double pi = std::acos(-1.0);
  auto f = [&](double t) {
    const double c = std::cos((t / steps + s) / (1.0 + s) * pi / 2.0);
    return c * c;
  };
  std::vector<double> abar(steps + 1, 1.0);
  for (int t = 1; t <= steps; ++t)
    abar[t] = abar[t - 1] * (1.0 - std::min(1.0 - f(t) / f(t - 1), 0.999));
  std::vector<double> ab(count + 1, 1.0);
  for (int i = 1; i <= count; ++i) ab[i] = abar[(2 * i * steps + count) / (2 * count)];
  double v = 1.0 - ab[count];
  for (int i = count; i >= 1; --i) {
    const double a = ab[i], b = 1.0 - a / ab[i - 1];
    const double eps_gain = (1.0 - a * var0 / (a * var0 + 1.0 - a)) / std::sqrt(1.0 - a);
    const double gain = (1.0 - b / std::sqrt(1.0 - a) * eps_gain) / std::sqrt(1.0 - b);
    v = gain * gain * v + (i > 1 ? b * (1.0 - ab[i - 1]) / (1.0 - a) : 0.0);
  }
  return v;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("cinediff_" + name + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& leaf) const { return path / leaf; }
};

}  // namespace testing

#endif
