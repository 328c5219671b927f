#include "cinediff/schedule.hpp"

#include <algorithm>
#include <numbers>

namespace cinediff {

std::string to_string(ScheduleKind kind) { return kind == ScheduleKind::Cosine ? "cosine" : "linear"; }

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "cosine") return ScheduleKind::Cosine;
  if (name == "linear") return ScheduleKind::Linear;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, int steps, double s_offset, Eigen::ArrayXd betas)
    : kind_(kind), s_offset_(s_offset), betas_(std::move(betas)) {
  if (steps < 2 || betas_.size() != steps) throw std::invalid_argument("NoiseSchedule: need >= 2 steps");
  alphas_ = 1.0 - betas_;
  alpha_bars_.resize(steps);
  posterior_variances_.resize(steps);
  double running = 1.0;
  for (int k = 0; k < steps; ++k) {
    const double prev = running;
    running *= alphas_[k];
    alpha_bars_[k] = running;
    posterior_variances_[k] = betas_[k] * (1.0 - prev) / (1.0 - running);
  }
}

Eigen::Index NoiseSchedule::check(int t) const {
  if (t < 1 || t > steps()) {
    throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }
  return t - 1;
}

NoiseSchedule make_schedule(ScheduleKind kind, int steps, double s_offset) {
  if (steps < 2) throw std::invalid_argument("make_schedule: need at least 2 steps");
  Eigen::ArrayXd betas(steps);
  if (kind == ScheduleKind::Cosine) {
    if (!(s_offset > 0.0)) throw std::invalid_argument("make_schedule: cosine offset must be positive");
    auto f = [&](double t) {
      const double c = std::cos((t / steps + s_offset) / (1.0 + s_offset) * std::numbers::pi / 2.0);
      return c * c;
    };
    const double f0 = f(0.0);
    for (int t = 1; t <= steps; ++t) {
      const double prev = f(t - 1.0) / f0;
      const double cur = f(static_cast<double>(t)) / f0;
      betas[t - 1] = std::min(1.0 - cur / prev, kMaxBeta);
    }
  } else {
    const double scale = 1000.0 / steps;
    betas = Eigen::ArrayXd::LinSpaced(steps, scale * 1e-4, scale * 0.02).min(kMaxBeta);
  }
  return NoiseSchedule(kind, steps, s_offset, std::move(betas));
}

RespacedSchedule::RespacedSchedule(const NoiseSchedule& base, std::vector<int> timesteps)
    : train_steps_(base.steps()), timesteps_(std::move(timesteps)) {
  const auto k = static_cast<Eigen::Index>(timesteps_.size());
  if (k < 1 || k > base.steps()) throw std::invalid_argument("RespacedSchedule: bad subsequence length");
  if (!std::ranges::is_sorted(timesteps_, std::less_equal<>{}) || timesteps_.front() < 1 ||
      timesteps_.back() > base.steps()) {
    throw std::invalid_argument("RespacedSchedule: timesteps must be strictly increasing within [1, T]");
  }
  betas_.resize(k);
  alpha_bars_.resize(k);
  posterior_variances_.resize(k);
  double prev = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double abar = base.alpha_bar(timesteps_[static_cast<std::size_t>(i)]);
    alpha_bars_[i] = abar;
    betas_[i] = 1.0 - abar / prev;
    posterior_variances_[i] = betas_[i] * (1.0 - prev) / (1.0 - abar);
    prev = abar;
  }
}

std::size_t RespacedSchedule::check(int i) const {
  if (i < 1 || i > size()) {
    throw std::out_of_range("respaced index " + std::to_string(i) + " outside [1, " + std::to_string(size()) + "]");
  }
  return static_cast<std::size_t>(i - 1);
}

RespacedSchedule respace(const NoiseSchedule& schedule, int count) {
  const int steps = schedule.steps();
  if (count < 1 || count > steps) {
    throw std::out_of_range("respace: count " + std::to_string(count) + " outside [1, " + std::to_string(steps) + "]");
  }
  std::vector<int> taus(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    // round half up in integer arithmetic
    const long long num = 2LL * i * steps + count;
    taus[static_cast<std::size_t>(i - 1)] = static_cast<int>(num / (2LL * count));
  }
  return RespacedSchedule(schedule, std::move(taus));
}

}  // namespace cinediff
