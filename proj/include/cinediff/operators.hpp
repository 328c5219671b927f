#ifndef CINEDIFF_OPERATORS_HPP
#define CINEDIFF_OPERATORS_HPP

#include "cinediff/volume.hpp"

namespace cinediff {

class SamplingMask;

// Centered orthonormal 2D DFT: DC sits at [H/2, W/2] and both directions are
// scaled by 1/sqrt(HW), so fft2c is unitary.
ComplexImage fft2c(const ComplexImage& image);
ComplexImage ifft2c(const ComplexImage& kspace);

template <typename Derived>
ComplexImage fft2c(const Eigen::DenseBase<Derived>& image) {
  return fft2c(ComplexImage(image.derived().template cast<cdouble>()));
}

template <typename Derived>
ComplexImage ifft2c(const Eigen::DenseBase<Derived>& kspace) {
  return ifft2c(ComplexImage(kspace.derived().template cast<cdouble>()));
}

// Frame-wise transforms of a stack.
ComplexVolume fft2c(const ComplexVolume& images);
ComplexVolume ifft2c(const ComplexVolume& kspace);

// Root-sum-of-squares over the first axis of a coil stack [C x H x W].
RealImage rss_combine(const ComplexVolume& coil_images);

// Zero every unsampled phase-encode row of a [T x H x W] k-space stack.
void apply_mask(ComplexVolume& kspace, const SamplingMask& mask);

// Pseudo data consistency in the magnitude domain. Per frame the sampled
// rows of fft2c(enhanced) are replaced by those of fft2c(dlrecon).
//
// pseudo_dc_kspace  -> the merged k-space K
// pseudo_dc_complex -> ifft2c(K), before projecting back to real magnitudes
// pseudo_dc         -> max(Re(ifft2c(K)), 0)
ComplexVolume pseudo_dc_kspace(const Cine& enhanced, const Cine& dlrecon, const SamplingMask& mask);
ComplexVolume pseudo_dc_complex(const Cine& enhanced, const Cine& dlrecon, const SamplingMask& mask);
Cine pseudo_dc(const Cine& enhanced, const Cine& dlrecon, const SamplingMask& mask);

// max(Re(x), 0) per element.
Cine project_magnitude(const ComplexVolume& images);

}  // namespace cinediff

#endif  // CINEDIFF_OPERATORS_HPP
