#include "cinediff/mimo.hpp"

#include <stdexcept>
#include <string>

namespace cinediff {

WindowPlan plan_windows(int frames, int group) {
  if (frames < 1 || group < 1) throw std::invalid_argument("plan_windows: frames and group must be >= 1");
  WindowPlan plan;
  plan.frames = frames;
  plan.group = group;
  const int count = (frames + group - 1) / group;
  plan.windows.resize(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    for (int j = 0; j < group; ++j) plan.windows[static_cast<std::size_t>(w)].push_back((w * group + j) % frames);
  }
  return plan;
}

Windows window(const Cine& video, int group) {
  Windows out{{}, plan_windows(static_cast<int>(video.frames()), group)};
  out.groups.reserve(out.plan.windows.size());
  for (const auto& frames : out.plan.windows) {
    Cine g(group, video.rows(), video.cols());
    for (int j = 0; j < group; ++j) g.data().row(j) = video.data().row(frames[static_cast<std::size_t>(j)]);
    out.groups.push_back(std::move(g));
  }
  return out;
}

Cine ungroup(const std::vector<Cine>& groups, const WindowPlan& plan) {
  if (static_cast<int>(groups.size()) != plan.num_windows() || groups.empty()) {
    throw std::invalid_argument("ungroup: expected " + std::to_string(plan.num_windows()) + " groups, got " +
                                std::to_string(groups.size()));
  }
  const Index rows = groups.front().rows();
  const Index cols = groups.front().cols();
  Cine out(plan.frames, rows, cols);
  for (int w = 0; w < plan.num_windows(); ++w) {
    const Cine& g = groups[static_cast<std::size_t>(w)];
    if (g.frames() != plan.group || g.rows() != rows || g.cols() != cols) {
      throw std::invalid_argument("ungroup: group " + std::to_string(w) + " does not match the plan");
    }
    for (int j = 0; j < plan.group; ++j) {
      if (!plan.is_pad(w, j)) out.data().row(w * plan.group + j) = g.data().row(j);
    }
  }
  return out;
}

}  // namespace cinediff
