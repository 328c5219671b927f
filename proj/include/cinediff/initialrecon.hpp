#ifndef CINEDIFF_INITIALRECON_HPP
#define CINEDIFF_INITIALRECON_HPP

// Initial ("DLrecon") reconstructions from undersampled multi-coil k-space.
// These are classical stand-ins for a learned reconstructor; externally
// computed videos can be injected through load_dlrecon().

#include "cinediff/phantom.hpp"
#include "cinediff/volume.hpp"

#include <filesystem>
#include <string>

namespace cinediff {

enum class ReconKind { ZeroFilled, ViewShare };

std::string to_string(ReconKind kind);
ReconKind parse_recon_kind(const std::string& name);

struct InitialReconstructor {
  ReconKind kind = ReconKind::ViewShare;
  int share_radius = 4;

  Cine operator()(const KSpaceData& kspace) const;
};

// Per coil ifft2c of the masked data, then root-sum-of-squares.
Cine zero_filled(const KSpaceData& kspace);

// For each frame, every unsampled phase-encode line is copied from the
// nearest frame (cyclic, |dt| <= radius, earlier frame on ties) that sampled
// it. Lines with no donor stay zero.
Cine view_share(const KSpaceData& kspace, int radius);

// Donor frame for (frame, line), or -1.
int view_share_donor(const SamplingMask& mask, int frame, int line, int radius);

// Per-frame filled line count after sharing.
std::vector<int> view_share_coverage(const SamplingMask& mask, int radius);

Cine load_dlrecon(const std::filesystem::path& path);

}  // namespace cinediff

#endif  // CINEDIFF_INITIALRECON_HPP
