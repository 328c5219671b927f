#ifndef CINEDIFF_SAMPLER_HPP
#define CINEDIFF_SAMPLER_HPP

// End-to-end enhancement of an initial reconstruction:
//   normalize -> window into G-frame groups -> per group, noise the
//   condition to an intermediate step and run the reverse chain -> ungroup
//   -> denormalize -> pseudo data consistency -> clamp.

#include "cinediff/denoiser.hpp"
#include "cinediff/initialrecon.hpp"
#include "cinediff/mimo.hpp"
#include "cinediff/normalization.hpp"
#include "cinediff/phantom.hpp"
#include "cinediff/schedule.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace cinediff {

struct EnhanceConfig {
  ScheduleKind schedule = ScheduleKind::Cosine;
  int train_steps = 1000;
  double s_offset = 0.008;
  int respace_steps = 50;
  int infer_steps = 10;
  int group = 3;
  double eta = 0.0;
  std::uint64_t seed = 1;
  bool pdc = true;
  double percentile = 0.99;
  int threads = 1;

  void validate() const;
};

struct RunStats {
  long long nfe = 0;
  int steps = 0;
  int windows = 0;
  int frames = 0;
  double wall_ms = 0.0;
};

struct EnhanceResult {
  Cine enhanced;
  RunStats stats;
  NormalizationRecord normalization;
  // ifft2c of the merged k-space, before the real-part/clamp projection.
  // Present only when pseudo data consistency ran.
  std::optional<ComplexVolume> pre_projection;
};

// Partial-diffusion start: q_sample of the (normalized) group at position i0
// with noise drawn from rng.
Cine ccdf_start(const Cine& group, int i0, const RespacedSchedule& schedule, std::mt19937_64& rng);

// Reverse chain for one window starting at position i0 = cfg.infer_steps.
Cine enhance_window(const Cine& condition, const std::vector<int>& frames, int window_index, const EnhanceConfig& cfg,
                    const RespacedSchedule& schedule, const Denoiser& denoiser,
                    const NormalizationRecord& normalization);

EnhanceResult enhance_video(const Cine& dlrecon, const SamplingMask& mask, const EnhanceConfig& cfg,
                            const Denoiser& denoiser);

EnhanceResult enhance_video(const KSpaceData& kspace, const InitialReconstructor& recon, const EnhanceConfig& cfg,
                            const Denoiser& denoiser);

// ceil(T / G) * S
long long expected_nfe(int frames, int group, int steps);

}  // namespace cinediff

#endif  // CINEDIFF_SAMPLER_HPP
