#include "cinediff/operators.hpp"

#include "cinediff/phantom.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace cinediff {

namespace {

// Eigen::FFT caches plans per length and is not safe to share across threads.
Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

// One centered 1D transform along a contiguous or strided line:
// ifftshift -> DFT -> fftshift.
void centered_line(Eigen::VectorXcd& buf, Eigen::VectorXcd& tmp, bool inverse) {
  const Index n = buf.size();
  const Index half = n / 2;
  for (Index i = 0; i < n; ++i) tmp[i] = buf[(i + half) % n];
  auto& fft = thread_fft();
  if (inverse) {
    fft.inv(buf, tmp);
  } else {
    fft.fwd(buf, tmp);
  }
  for (Index i = 0; i < n; ++i) tmp[(i + half) % n] = buf[i];
  buf.swap(tmp);
}

ComplexImage transform(const ComplexImage& in, bool inverse) {
  const Index rows = in.rows();
  const Index cols = in.cols();
  if (rows < 1 || cols < 1) throw std::invalid_argument("fft2c: empty image");
  ComplexImage out = in;

  Eigen::VectorXcd buf(cols), tmp(cols);
  for (Index r = 0; r < rows; ++r) {
    buf = out.row(r).transpose();
    centered_line(buf, tmp, inverse);
    out.row(r) = buf.transpose();
  }
  buf.resize(rows);
  tmp.resize(rows);
  for (Index c = 0; c < cols; ++c) {
    buf = out.col(c);
    centered_line(buf, tmp, inverse);
    out.col(c) = buf;
  }
  out *= 1.0 / std::sqrt(static_cast<double>(rows * cols));
  return out;
}

void check_mask(const Cine& v, const SamplingMask& mask, const char* what) {
  if (mask.frames() != v.frames() || mask.lines() != v.rows()) {
    throw std::invalid_argument(std::string(what) + ": mask shape does not match volume");
  }
}

}  // namespace

ComplexImage fft2c(const ComplexImage& image) { return transform(image, false); }
ComplexImage ifft2c(const ComplexImage& kspace) { return transform(kspace, true); }

ComplexVolume fft2c(const ComplexVolume& images) {
  ComplexVolume out(images.frames(), images.rows(), images.cols());
  for (Index t = 0; t < images.frames(); ++t) out.frame(t) = fft2c(images.frame(t));
  return out;
}

ComplexVolume ifft2c(const ComplexVolume& kspace) {
  ComplexVolume out(kspace.frames(), kspace.rows(), kspace.cols());
  for (Index t = 0; t < kspace.frames(); ++t) out.frame(t) = ifft2c(kspace.frame(t));
  return out;
}

RealImage rss_combine(const ComplexVolume& coil_images) {
  if (coil_images.frames() < 1) throw std::invalid_argument("rss_combine: need at least one coil");
  Eigen::Array<double, 1, Eigen::Dynamic> sum = coil_images.data().abs2().colwise().sum();
  return Eigen::Map<const RealImage>(sum.data(), coil_images.rows(), coil_images.cols()).sqrt();
}

void apply_mask(ComplexVolume& kspace, const SamplingMask& mask) {
  if (mask.frames() != kspace.frames() || mask.lines() != kspace.rows()) {
    throw std::invalid_argument("apply_mask: mask shape does not match k-space");
  }
  for (Index t = 0; t < kspace.frames(); ++t) {
    auto frame = kspace.frame(t);
    for (Index ky = 0; ky < kspace.rows(); ++ky) {
      if (!mask.sampled(t, ky)) frame.row(ky).setZero();
    }
  }
}

ComplexVolume pseudo_dc_kspace(const Cine& enhanced, const Cine& dlrecon, const SamplingMask& mask) {
  require_same_shape(enhanced, dlrecon, "pseudo_dc");
  check_mask(enhanced, mask, "pseudo_dc");
  ComplexVolume merged(enhanced.frames(), enhanced.rows(), enhanced.cols());
  for (Index t = 0; t < enhanced.frames(); ++t) {
    auto k = merged.frame(t);
    k = fft2c(enhanced.frame(t));
    const ComplexImage measured = fft2c(dlrecon.frame(t));
    for (Index ky = 0; ky < enhanced.rows(); ++ky) {
      if (mask.sampled(t, ky)) k.row(ky) = measured.row(ky);
    }
  }
  return merged;
}

ComplexVolume pseudo_dc_complex(const Cine& enhanced, const Cine& dlrecon, const SamplingMask& mask) {
  return ifft2c(pseudo_dc_kspace(enhanced, dlrecon, mask));
}

Cine project_magnitude(const ComplexVolume& images) {
  return Cine(images.rows(), images.cols(), images.data().real().max(0.0));
}

Cine pseudo_dc(const Cine& enhanced, const Cine& dlrecon, const SamplingMask& mask) {
  return project_magnitude(pseudo_dc_complex(enhanced, dlrecon, mask));
}

}  // namespace cinediff
