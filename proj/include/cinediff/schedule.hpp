#ifndef CINEDIFF_SCHEDULE_HPP
#define CINEDIFF_SCHEDULE_HPP

// DDPM noise schedules, timestep respacing and the forward/reverse step
// formulas. Timesteps are 1-based throughout; index 0 denotes the clean
// boundary with alpha_bar = 1.

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cinediff {

enum class ScheduleKind { Cosine, Linear };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& name);

inline constexpr double kMaxBeta = 0.999;

class NoiseSchedule {
 public:
  NoiseSchedule(ScheduleKind kind, int steps, double s_offset, Eigen::ArrayXd betas);

  ScheduleKind kind() const { return kind_; }
  int steps() const { return static_cast<int>(betas_.size()); }
  double s_offset() const { return s_offset_; }

  double beta(int t) const { return betas_[check(t)]; }
  double alpha(int t) const { return alphas_[check(t)]; }
  double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars_[check(t)]; }
  double posterior_variance(int t) const { return posterior_variances_[check(t)]; }

  // Arrays indexed 0..steps-1 for t = 1..steps.
  const Eigen::ArrayXd& betas() const { return betas_; }
  const Eigen::ArrayXd& alphas() const { return alphas_; }
  const Eigen::ArrayXd& alpha_bars() const { return alpha_bars_; }
  const Eigen::ArrayXd& posterior_variances() const { return posterior_variances_; }

 private:
  Eigen::Index check(int t) const;

  ScheduleKind kind_;
  double s_offset_;
  Eigen::ArrayXd betas_;
  Eigen::ArrayXd alphas_;
  Eigen::ArrayXd alpha_bars_;
  Eigen::ArrayXd posterior_variances_;
};

// Cosine: alpha_bar(t) = f(t)/f(0), f(t) = cos^2(((t/T + s)/(1 + s)) pi/2),
// beta_t = min(1 - alpha_bar(t)/alpha_bar(t-1), 0.999), and the stored
// cumulative products are recomputed from the clipped betas.
// Linear: betas evenly spaced in [1e-4, 0.02] scaled by 1000/T.
NoiseSchedule make_schedule(ScheduleKind kind, int steps = 1000, double s_offset = 0.008);

// A subsequence tau_1 < ... < tau_K of training timesteps with recomputed
// step coefficients. Positions i are 1-based, i = 0 is the clean boundary.
class RespacedSchedule {
 public:
  RespacedSchedule(const NoiseSchedule& base, std::vector<int> timesteps);

  int size() const { return static_cast<int>(timesteps_.size()); }
  int train_steps() const { return train_steps_; }
  int timestep(int i) const { return timesteps_[check(i)]; }
  const std::vector<int>& timesteps() const { return timesteps_; }

  double beta(int i) const { return betas_[check(i)]; }
  double alpha(int i) const { return 1.0 - betas_[check(i)]; }
  double alpha_bar(int i) const { return i == 0 ? 1.0 : alpha_bars_[check(i)]; }
  double posterior_variance(int i) const { return posterior_variances_[check(i)]; }

  const Eigen::ArrayXd& betas() const { return betas_; }
  const Eigen::ArrayXd& alpha_bars() const { return alpha_bars_; }
  const Eigen::ArrayXd& posterior_variances() const { return posterior_variances_; }

 private:
  std::size_t check(int i) const;

  int train_steps_;
  std::vector<int> timesteps_;
  Eigen::ArrayXd betas_;
  Eigen::ArrayXd alpha_bars_;
  Eigen::ArrayXd posterior_variances_;
};

// tau_i = round(i * T / K) for i = 1..K.
RespacedSchedule respace(const NoiseSchedule& schedule, int count);

// x_i = sqrt(abar_i) x0 + sqrt(1 - abar_i) eps
template <typename D1, typename D2>
typename D1::PlainObject q_sample(const Eigen::ArrayBase<D1>& x0, int i, const Eigen::ArrayBase<D2>& eps,
                                  const RespacedSchedule& schedule) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols()) {
    throw std::invalid_argument("q_sample: noise shape differs from x0");
  }
  const double abar = schedule.alpha_bar(i);
  return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
}

// x0 implied by x_i and a noise estimate.
template <typename D1, typename D2>
typename D1::PlainObject predict_x0(const Eigen::ArrayBase<D1>& x, int i, const Eigen::ArrayBase<D2>& eps,
                                    const RespacedSchedule& schedule) {
  const double abar = schedule.alpha_bar(i);
  return (x - std::sqrt(1.0 - abar) * eps) / std::sqrt(abar);
}

// Ancestral step with fixed variance:
//   x_{i-1} = (x_i - beta_i / sqrt(1 - abar_i) eps_hat) / sqrt(alpha_i) + eta sqrt(var_i) z
// var_1 = 0, so the final step is always noiseless.
template <typename D1, typename D2, typename D3>
typename D1::PlainObject posterior_step(const Eigen::ArrayBase<D1>& x, const Eigen::ArrayBase<D2>& eps_hat, int i,
                                        const RespacedSchedule& schedule, const Eigen::ArrayBase<D3>& z,
                                        double eta) {
  if (x.rows() != eps_hat.rows() || x.cols() != eps_hat.cols() || x.rows() != z.rows() || x.cols() != z.cols()) {
    throw std::invalid_argument("posterior_step: operand shapes differ");
  }
  if (eta != 0.0 && eta != 1.0) throw std::invalid_argument("posterior_step: eta must be 0 or 1");
  const double beta = schedule.beta(i);
  const double abar = schedule.alpha_bar(i);
  const double sigma = std::sqrt(schedule.posterior_variance(i));
  typename D1::PlainObject mean = (x - (beta / std::sqrt(1.0 - abar)) * eps_hat) / std::sqrt(1.0 - beta);
  if (eta != 0.0 && sigma > 0.0) mean += (eta * sigma) * z;
  return mean;
}

}  // namespace cinediff

#endif  // CINEDIFF_SCHEDULE_HPP
