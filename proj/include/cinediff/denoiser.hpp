#ifndef CINEDIFF_DENOISER_HPP
#define CINEDIFF_DENOISER_HPP

// Noise (epsilon) predictors consumed by the reverse diffusion sampler. Every
// predictor maps a [G x H x W] noisy group plus its [G x H x W] condition to a
// [G x H x W] noise estimate and is deterministic in its inputs.

#include "cinediff/normalization.hpp"
#include "cinediff/schedule.hpp"
#include "cinediff/tensorio.hpp"
#include "cinediff/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cinediff {

struct DenoiserInput {
  const Cine& noisy;
  const Cine& condition;
  int step = 0;             // respaced position i
  int timestep = 0;         // training-schedule index tau_i
  double alpha_bar = 0.0;   // abar'_i
  std::span<const int> frames = {};  // source video frame per channel
  const NormalizationRecord* normalization = nullptr;
};

class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Cine predict(const DenoiserInput& input) const = 0;
  virtual std::string name() const = 0;
};

// eps = (x_i - sqrt(abar) x0) / sqrt(1 - abar)
template <typename D1, typename D2>
typename D1::PlainObject oracle_predict(const Eigen::ArrayBase<D1>& noisy, const Eigen::ArrayBase<D2>& x0,
                                        double alpha_bar) {
  if (noisy.rows() != x0.rows() || noisy.cols() != x0.cols()) {
    throw std::invalid_argument("oracle_predict: truth shape differs from input");
  }
  if (!(alpha_bar < 1.0)) throw std::domain_error("oracle_predict: alpha_bar == 1 leaves no noise to predict");
  return (noisy - std::sqrt(alpha_bar) * x0) / std::sqrt(1.0 - alpha_bar);
}

// Closed-form noise estimate under a per-pixel Gaussian prior x0 ~ N(mu0, var0).
template <typename D1>
typename D1::PlainObject gaussian_prior_predict(const Eigen::ArrayBase<D1>& noisy, double mu0, double var0,
                                                double alpha_bar) {
  if (!(var0 > 0.0)) throw std::invalid_argument("gaussian_prior_predict: var0 must be positive");
  if (!(alpha_bar < 1.0)) throw std::domain_error("gaussian_prior_predict: alpha_bar must be < 1");
  const double sa = std::sqrt(alpha_bar);
  const double denom = alpha_bar * var0 + 1.0 - alpha_bar;
  typename D1::PlainObject mean = (sa * var0 * noisy + (1.0 - alpha_bar) * mu0) / denom;
  return (noisy - sa * mean) / std::sqrt(1.0 - alpha_bar);
}

// Knows the clean video. Expects the sampler to supply frame indices and the
// normalization so that the truth is compared in diffusion units.
class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(Cine truth) : truth_(std::move(truth)) {}
  Cine predict(const DenoiserInput& input) const override;
  std::string name() const override { return "oracle"; }

 private:
  Cine truth_;
};

// The oracle against the condition itself: the reverse chain returns the
// conditioning video unchanged.
class PassthroughDenoiser final : public Denoiser {
 public:
  Cine predict(const DenoiserInput& input) const override;
  std::string name() const override { return "passthrough"; }
};

class GaussianPriorDenoiser final : public Denoiser {
 public:
  GaussianPriorDenoiser(double mu0, double var0);
  Cine predict(const DenoiserInput& input) const override;
  std::string name() const override { return "gaussian"; }

 private:
  double mu0_;
  double var0_;
};

// ---------------------------------------------------------------------------
// TinyCondNet: stem conv(2G->32), sinusoidal time MLP (32->64->64), three
// residual blocks conv(32->32) + per-channel time bias + conv(32->32), and a
// conv(32->G) head. All convs are 3x3, stride 1, zero padding 1, with bias.

namespace tinycondnet {

inline constexpr int kWidth = 32;
inline constexpr int kEmbedDim = 32;
inline constexpr int kTimeDim = 64;
inline constexpr int kBlocks = 3;

std::vector<tensorio::LayerSpec> layer_table(int group = 3);
std::int64_t parameter_count(int group = 3);

// Seeded N(0, 1/fan_in) weights with small biases.
tensorio::WeightsMap random_weights(int group, std::uint64_t seed);
tensorio::WeightsMap zero_weights(int group);

Eigen::ArrayXf sinusoidal_embedding(double timestep);

}  // namespace tinycondnet

class TinyCondNet final : public Denoiser {
 public:
  TinyCondNet(const tensorio::WeightsMap& weights, int group);
  static TinyCondNet load(const std::filesystem::path& path, int group);

  int group() const { return group_; }

  // Raw forward pass on float tensors: input channels [2G x HW] (noisy then
  // condition), output [G x HW].
  Eigen::MatrixXf forward(const Eigen::Ref<const Eigen::MatrixXf>& input, Index rows, Index cols,
                          double timestep) const;

  Cine predict(const DenoiserInput& input) const override;
  std::string name() const override { return "tinycondnet"; }

 private:
  struct Conv {
    Eigen::MatrixXf weight;  // [out x in*9]
    Eigen::VectorXf bias;
  };
  struct Linear {
    Eigen::MatrixXf weight;  // [out x in]
    Eigen::VectorXf bias;
  };
  struct Block {
    Conv conv1;
    Linear time_proj;
    Conv conv2;
  };

  static Eigen::MatrixXf conv3x3(const Conv& conv, const Eigen::MatrixXf& x, Index rows, Index cols);

  int group_;
  Conv stem_;
  Linear time_fc1_;
  Linear time_fc2_;
  std::vector<Block> blocks_;
  Conv head_;
};

}  // namespace cinediff

#endif  // CINEDIFF_DENOISER_HPP
