#ifndef CINEDIFF_NORMALIZATION_HPP
#define CINEDIFF_NORMALIZATION_HPP

#include "cinediff/volume.hpp"

namespace cinediff {

// Maps magnitudes into the diffusion domain: u = clip(x / scale, 0, 2) - 1,
// where scale is a high quantile of the conditioning video.
struct NormalizationRecord {
  double scale = 1.0;
  double percentile = 0.99;

  template <typename Derived>
  auto forward(const Eigen::ArrayBase<Derived>& x) const {
    return (x / scale).max(0.0).min(2.0) - 1.0;
  }
  template <typename Derived>
  auto inverse(const Eigen::ArrayBase<Derived>& u) const {
    return (u + 1.0) * scale;
  }

  Cine forward(const Cine& video) const { return Cine(video.rows(), video.cols(), forward(video.data())); }
  Cine inverse(const Cine& video) const { return Cine(video.rows(), video.cols(), inverse(video.data())); }
};

// Quantile with linear interpolation between order statistics.
double quantile(const Eigen::Ref<const Eigen::ArrayXd>& values, double p);

NormalizationRecord fit_normalization(const Cine& video, double percentile = 0.99);

}  // namespace cinediff

#endif  // CINEDIFF_NORMALIZATION_HPP
