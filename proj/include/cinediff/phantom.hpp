#ifndef CINEDIFF_PHANTOM_HPP
#define CINEDIFF_PHANTOM_HPP

// Simulated cine acquisition: a beating heart-like phantom, coil
// sensitivities, real-time undersampling masks and noisy multi-coil k-space.

#include "cinediff/volume.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cinediff {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhantomConfig {
  int rows = 64;
  int cols = 64;
  int phases = 25;
  int coils = 8;
  // Fractional contraction of the inner myocardial radius at end-systole.
  double amplitude = 0.3;
  // Complex k-space noise std relative to a unit-magnitude signal.
  double noise_sigma = 0.01;
  // Inner (end-diastolic) and outer annulus radii as fractions of min(rows, cols).
  double inner_radius = 0.10;
  double outer_radius = 0.16;
  // Metadata only.
  double pixel_spacing_mm = 1.82;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Ellipse {
  double center_row;
  double center_col;
  double semi_rows;
  double semi_cols;
  double intensity;

  bool contains(double r, double c) const;
};

// Resolved geometry in pixel units. Static structures are jittered by the
// seed so that different seeds give different anatomies.
struct PhantomGeometry {
  Ellipse torso;
  std::vector<Ellipse> organs;
  double heart_row;
  double heart_col;
  double inner_radius;  // r0, end-diastolic inner radius
  double outer_radius;
  double amplitude;
  int phases;
  double blood_intensity;
  double myocardium_intensity;

  // r_in(t) = r0 (1 - a (1 - cos(2 pi t / T)) / 2)
  double inner_radius_at(double t) const;
};

struct Roi {
  Index row0 = 0;
  Index col0 = 0;
  Index rows = 0;  // 0 means "to the edge"
  Index cols = 0;
};

PhantomGeometry phantom_geometry(const PhantomConfig& cfg);
Roi heart_roi(const PhantomGeometry& geometry, int rows, int cols, double margin = 2.0);

Cine generate_phantom(const PhantomConfig& cfg);

// Coil maps [C x H x W], normalized to unit root-sum-of-squares everywhere.
ComplexVolume generate_coils(int rows, int cols, int coils, std::uint64_t seed);

enum class MaskScheme { Lattice, UniformRandom };

std::string to_string(MaskScheme scheme);
MaskScheme parse_mask_scheme(const std::string& name);

// Phase-encode line pattern [T x H]; a sampled line covers the full readout.
class SamplingMask {
 public:
  using Pattern = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SamplingMask() = default;
  SamplingMask(Pattern pattern, int acceleration, int center_lines, MaskScheme scheme);

  Index frames() const { return pattern_.rows(); }
  Index lines() const { return pattern_.cols(); }
  bool sampled(Index frame, Index line) const { return pattern_(frame, line); }
  const Pattern& pattern() const { return pattern_; }
  int acceleration() const { return acceleration_; }
  int center_lines() const { return center_lines_; }
  MaskScheme scheme() const { return scheme_; }

  Index sampled_count() const { return pattern_.count(); }
  Index sampled_count(Index frame) const { return pattern_.row(frame).count(); }
  double effective_acceleration() const;

  // Fully sampled mask of the given size.
  static SamplingMask full(Index frames, Index lines);

 private:
  Pattern pattern_;
  int acceleration_ = 1;
  int center_lines_ = 0;
  MaskScheme scheme_ = MaskScheme::Lattice;
};

SamplingMask generate_mask(int frames, int lines, int acceleration, int center_lines,
                           MaskScheme scheme = MaskScheme::Lattice, std::uint64_t seed = 0);

// Rows [H/2 - n/2, H/2 + n/2) of centered k-space.
std::pair<int, int> center_block(int lines, int center_lines);

struct KSpaceData {
  std::vector<ComplexVolume> coils;  // per coil: [T x H x W], centered k-space
  SamplingMask mask;

  Index num_coils() const { return static_cast<Index>(coils.size()); }
  Index frames() const { return coils.empty() ? 0 : coils.front().frames(); }
  Index rows() const { return coils.empty() ? 0 : coils.front().rows(); }
  Index cols() const { return coils.empty() ? 0 : coils.front().cols(); }
};

KSpaceData simulate_kspace(const Cine& truth, const ComplexVolume& coil_maps, const SamplingMask& mask,
                           double noise_sigma, std::uint64_t seed);

}  // namespace cinediff

#endif  // CINEDIFF_PHANTOM_HPP
