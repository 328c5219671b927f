#ifndef CINEDIFF_MIMO_HPP
#define CINEDIFF_MIMO_HPP

// Multi-in-multi-out grouping: a T-phase video is cut into ceil(T/G)
// non-overlapping windows of G consecutive phases, each processed as one
// G-channel sample. When G does not divide T the tail window wraps around
// the cardiac cycle (frames 0, 1, ... are reused as padding).

#include "cinediff/volume.hpp"

#include <vector>

namespace cinediff {

struct WindowPlan {
  int frames = 0;
  int group = 1;
  std::vector<std::vector<int>> windows;  // source frame index per slot

  int padded_frames() const { return group * static_cast<int>(windows.size()); }
  int num_windows() const { return static_cast<int>(windows.size()); }
  // Slot position w*G + j >= T marks a cyclic pad.
  bool is_pad(int window, int slot) const { return window * group + slot >= frames; }
};

WindowPlan plan_windows(int frames, int group);

struct Windows {
  std::vector<Cine> groups;
  WindowPlan plan;
};

Windows window(const Cine& video, int group);

// Inverse of window(): pads are dropped, only original slots are read back.
Cine ungroup(const std::vector<Cine>& groups, const WindowPlan& plan);

}  // namespace cinediff

#endif  // CINEDIFF_MIMO_HPP
