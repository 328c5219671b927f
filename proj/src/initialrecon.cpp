#include "cinediff/initialrecon.hpp"

#include "cinediff/operators.hpp"
#include "cinediff/tensorio.hpp"

#include <iostream>

namespace cinediff {

std::string to_string(ReconKind kind) { return kind == ReconKind::ZeroFilled ? "zero_filled" : "view_share"; }

ReconKind parse_recon_kind(const std::string& name) {
  if (name == "zero_filled") return ReconKind::ZeroFilled;
  if (name == "view_share") return ReconKind::ViewShare;
  throw std::invalid_argument("unknown reconstructor '" + name + "'");
}

Cine InitialReconstructor::operator()(const KSpaceData& kspace) const {
  return kind == ReconKind::ZeroFilled ? zero_filled(kspace) : view_share(kspace, share_radius);
}

namespace {

void check_kspace(const KSpaceData& k) {
  if (k.coils.empty()) throw std::invalid_argument("reconstruction: no coil data");
  for (const auto& c : k.coils) require_same_shape(c, k.coils.front(), "reconstruction coils");
  if (k.mask.frames() != k.frames() || k.mask.lines() != k.rows()) {
    throw std::invalid_argument("reconstruction: mask shape does not match k-space");
  }
}

Cine combine(const std::vector<ComplexVolume>& coil_kspace) {
  const auto& first = coil_kspace.front();
  const Index coils = static_cast<Index>(coil_kspace.size());
  Cine out(first.frames(), first.rows(), first.cols());
  ComplexVolume images(coils, first.rows(), first.cols());
  for (Index t = 0; t < first.frames(); ++t) {
    for (Index c = 0; c < coils; ++c) images.frame(c) = ifft2c(coil_kspace[static_cast<std::size_t>(c)].frame(t));
    out.frame(t) = rss_combine(images);
  }
  return out;
}

}  // namespace

Cine zero_filled(const KSpaceData& kspace) {
  check_kspace(kspace);
  std::vector<ComplexVolume> masked = kspace.coils;
  for (auto& c : masked) apply_mask(c, kspace.mask);
  return combine(masked);
}

int view_share_donor(const SamplingMask& mask, int frame, int line, int radius) {
  if (mask.sampled(frame, line)) return frame;
  const int frames = static_cast<int>(mask.frames());
  for (int d = 1; d <= radius; ++d) {
    const int earlier = ((frame - d) % frames + frames) % frames;
    if (mask.sampled(earlier, line)) return earlier;
    const int later = (frame + d) % frames;
    if (mask.sampled(later, line)) return later;
  }
  return -1;
}

std::vector<int> view_share_coverage(const SamplingMask& mask, int radius) {
  std::vector<int> out(static_cast<std::size_t>(mask.frames()), 0);
  for (int t = 0; t < mask.frames(); ++t) {
    for (int ky = 0; ky < mask.lines(); ++ky) {
      if (view_share_donor(mask, t, ky, radius) >= 0) ++out[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

Cine view_share(const KSpaceData& kspace, int radius) {
  check_kspace(kspace);
  if (radius < 0) throw std::invalid_argument("view_share: radius must be >= 0");
  if (kspace.mask.scheme() != MaskScheme::Lattice) {
    std::clog << "view_share: mask is not a lattice pattern; some lines may stay empty\n";
  }
  const auto& mask = kspace.mask;
  const int frames = static_cast<int>(kspace.frames());
  const int lines = static_cast<int>(kspace.rows());

  std::vector<ComplexVolume> shared;
  shared.reserve(kspace.coils.size());
  for (const auto& coil : kspace.coils) {
    ComplexVolume filled(coil.frames(), coil.rows(), coil.cols());
    for (int t = 0; t < frames; ++t) {
      auto dst = filled.frame(t);
      for (int ky = 0; ky < lines; ++ky) {
        const int donor = view_share_donor(mask, t, ky, radius);
        if (donor >= 0) dst.row(ky) = coil.frame(donor).row(ky);
      }
    }
    shared.push_back(std::move(filled));
  }
  return combine(shared);
}

Cine load_dlrecon(const std::filesystem::path& path) { return tensorio::to_cine(tensorio::read_tensor(path)); }

}  // namespace cinediff
