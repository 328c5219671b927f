#include "cinediff/denoiser.hpp"

#include "cinediff/rng.hpp"

#include <cmath>
#include <random>

namespace cinediff {

namespace {

void check_input(const DenoiserInput& in) {
  require_same_shape(in.noisy, in.condition, "denoiser input");
}

}  // namespace

Cine OracleDenoiser::predict(const DenoiserInput& in) const {
  check_input(in);
  if (static_cast<Index>(in.frames.size()) != in.noisy.frames()) {
    throw std::invalid_argument("oracle denoiser: frame indices missing for the window");
  }
  if (truth_.rows() != in.noisy.rows() || truth_.cols() != in.noisy.cols()) {
    throw std::invalid_argument("oracle denoiser: truth and input sizes differ");
  }
  Cine x0(in.noisy.frames(), in.noisy.rows(), in.noisy.cols());
  for (std::size_t j = 0; j < in.frames.size(); ++j) {
    x0.data().row(static_cast<Index>(j)) = truth_.data().row(in.frames[j]);
  }
  if (in.normalization) x0 = in.normalization->forward(x0);
  return Cine(x0.rows(), x0.cols(), oracle_predict(in.noisy.data(), x0.data(), in.alpha_bar));
}

Cine PassthroughDenoiser::predict(const DenoiserInput& in) const {
  check_input(in);
  return Cine(in.noisy.rows(), in.noisy.cols(), oracle_predict(in.noisy.data(), in.condition.data(), in.alpha_bar));
}

GaussianPriorDenoiser::GaussianPriorDenoiser(double mu0, double var0) : mu0_(mu0), var0_(var0) {
  if (!(var0 > 0.0)) throw std::invalid_argument("GaussianPriorDenoiser: var0 must be positive");
}

Cine GaussianPriorDenoiser::predict(const DenoiserInput& in) const {
  check_input(in);
  return Cine(in.noisy.rows(), in.noisy.cols(), gaussian_prior_predict(in.noisy.data(), mu0_, var0_, in.alpha_bar));
}

// ---------------------------------------------------------------------------

namespace tinycondnet {

std::vector<tensorio::LayerSpec> layer_table(int group) {
  if (group < 1) throw std::invalid_argument("layer_table: group must be >= 1");
  const std::int64_t g = group;
  const std::int64_t w = kWidth;
  std::vector<tensorio::LayerSpec> t = {
      {"stem.weight", {w, 2 * g, 3, 3}},
      {"stem.bias", {w}},
      {"time_mlp.fc1.weight", {kTimeDim, kEmbedDim}},
      {"time_mlp.fc1.bias", {kTimeDim}},
      {"time_mlp.fc2.weight", {kTimeDim, kTimeDim}},
      {"time_mlp.fc2.bias", {kTimeDim}},
  };
  for (int b = 1; b <= kBlocks; ++b) {
    const std::string p = "b" + std::to_string(b) + ".";
    t.push_back({p + "conv1.weight", {w, w, 3, 3}});
    t.push_back({p + "conv1.bias", {w}});
    t.push_back({p + "time_proj.weight", {w, kTimeDim}});
    t.push_back({p + "time_proj.bias", {w}});
    t.push_back({p + "conv2.weight", {w, w, 3, 3}});
    t.push_back({p + "conv2.bias", {w}});
  }
  t.push_back({"head.weight", {g, w, 3, 3}});
  t.push_back({"head.bias", {g}});
  return t;
}

std::int64_t parameter_count(int group) {
  std::int64_t n = 0;
  for (const auto& spec : layer_table(group)) {
    std::int64_t k = 1;
    for (auto d : spec.shape) k *= d;
    n += k;
  }
  return n;
}

tensorio::WeightsMap random_weights(int group, std::uint64_t seed) {
  tensorio::WeightsMap out;
  std::uint64_t index = 0;
  for (const auto& spec : layer_table(group)) {
    auto rng = substream(seed, StreamTag::Weights, {index++});
    std::int64_t numel = 1;
    for (auto d : spec.shape) numel *= d;
    const bool is_bias = spec.shape.size() == 1;
    std::int64_t fan_in = 1;
    for (std::size_t i = 1; i < spec.shape.size(); ++i) fan_in *= spec.shape[i];
    std::normal_distribution<double> normal(0.0, is_bias ? 0.01 : 1.0 / std::sqrt(static_cast<double>(fan_in)));
    tensorio::Layer layer{spec.shape, std::vector<float>(static_cast<std::size_t>(numel))};
    for (auto& v : layer.values) v = static_cast<float>(normal(rng));
    out.emplace(spec.name, std::move(layer));
  }
  return out;
}

tensorio::WeightsMap zero_weights(int group) {
  tensorio::WeightsMap out;
  for (const auto& spec : layer_table(group)) {
    std::int64_t numel = 1;
    for (auto d : spec.shape) numel *= d;
    out.emplace(spec.name, tensorio::Layer{spec.shape, std::vector<float>(static_cast<std::size_t>(numel), 0.0f)});
  }
  return out;
}

Eigen::ArrayXf sinusoidal_embedding(double timestep) {
  constexpr int half = kEmbedDim / 2;
  Eigen::ArrayXf e(kEmbedDim);
  for (int k = 0; k < half; ++k) {
    const double freq = std::pow(10000.0, -2.0 * k / kEmbedDim);
    e[k] = static_cast<float>(std::sin(timestep * freq));
    e[k + half] = static_cast<float>(std::cos(timestep * freq));
  }
  return e;
}

}  // namespace tinycondnet

namespace {

Eigen::MatrixXf as_matrix(const tensorio::Layer& layer, Index rows) {
  const Index cols = static_cast<Index>(layer.values.size()) / rows;
  return Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(layer.values.data(),
                                                                                                rows, cols);
}

Eigen::VectorXf as_vector(const tensorio::Layer& layer) {
  return Eigen::Map<const Eigen::VectorXf>(layer.values.data(), static_cast<Index>(layer.values.size()));
}

Eigen::MatrixXf silu(const Eigen::MatrixXf& x) {
  return (x.array() / (1.0f + (-x.array()).exp())).matrix();
}

Eigen::VectorXf silu(const Eigen::VectorXf& x) {
  return (x.array() / (1.0f + (-x.array()).exp())).matrix();
}

}  // namespace

TinyCondNet::TinyCondNet(const tensorio::WeightsMap& weights, int group) : group_(group) {
  const auto table = tinycondnet::layer_table(group);
  for (const auto& spec : table) {
    auto it = weights.find(spec.name);
    if (it == weights.end()) {
      throw tensorio::WeightsError(tensorio::WeightsError::Kind::MissingLayer, "missing layer '" + spec.name + "'");
    }
    std::int64_t numel = 1;
    for (auto d : spec.shape) numel *= d;
    if (it->second.shape != spec.shape || static_cast<std::int64_t>(it->second.values.size()) != numel) {
      throw tensorio::WeightsError(tensorio::WeightsError::Kind::ShapeMismatch,
                                   "layer '" + spec.name + "' does not match the architecture");
    }
  }
  auto conv = [&](const std::string& p, Index out) {
    return Conv{as_matrix(weights.at(p + ".weight"), out), as_vector(weights.at(p + ".bias"))};
  };
  auto linear = [&](const std::string& p, Index out) {
    return Linear{as_matrix(weights.at(p + ".weight"), out), as_vector(weights.at(p + ".bias"))};
  };
  using namespace tinycondnet;
  stem_ = conv("stem", kWidth);
  time_fc1_ = linear("time_mlp.fc1", kTimeDim);
  time_fc2_ = linear("time_mlp.fc2", kTimeDim);
  for (int b = 1; b <= kBlocks; ++b) {
    const std::string p = "b" + std::to_string(b);
    blocks_.push_back({conv(p + ".conv1", kWidth), linear(p + ".time_proj", kWidth), conv(p + ".conv2", kWidth)});
  }
  head_ = conv("head", group);
}

TinyCondNet TinyCondNet::load(const std::filesystem::path& path, int group) {
  const auto table = tinycondnet::layer_table(group);
  return TinyCondNet(tensorio::load_weights(path, table), group);
}

// Cross-correlation with zero padding via im2col; column index of the
// unfolded matrix is ((c * 3 + ky) * 3 + kx), matching OIHW weight order.
Eigen::MatrixXf TinyCondNet::conv3x3(const Conv& conv, const Eigen::MatrixXf& x, Index rows, Index cols) {
  const Index channels = x.rows();
  const Index pixels = rows * cols;
  Eigen::MatrixXf unfolded = Eigen::MatrixXf::Zero(channels * 9, pixels);
  for (Index p = 0; p < pixels; ++p) {
    const Index y = p / cols;
    const Index xpos = p % cols;
    for (int ky = 0; ky < 3; ++ky) {
      const Index sy = y + ky - 1;
      if (sy < 0 || sy >= rows) continue;
      for (int kx = 0; kx < 3; ++kx) {
        const Index sx = xpos + kx - 1;
        if (sx < 0 || sx >= cols) continue;
        const Index src = sy * cols + sx;
        for (Index c = 0; c < channels; ++c) unfolded(c * 9 + ky * 3 + kx, p) = x(c, src);
      }
    }
  }
  Eigen::MatrixXf out = conv.weight * unfolded;
  out.colwise() += conv.bias;
  return out;
}

Eigen::MatrixXf TinyCondNet::forward(const Eigen::Ref<const Eigen::MatrixXf>& input, Index rows, Index cols,
                                     double timestep) const {
  if (input.rows() != 2 * group_ || input.cols() != rows * cols) {
    throw std::invalid_argument("TinyCondNet: expected input [" + std::to_string(2 * group_) + " x " +
                                std::to_string(rows * cols) + "]");
  }
  const Eigen::VectorXf emb = tinycondnet::sinusoidal_embedding(timestep).matrix();
  const Eigen::VectorXf t1 = silu(Eigen::VectorXf(time_fc1_.weight * emb + time_fc1_.bias));
  const Eigen::VectorXf temb = time_fc2_.weight * t1 + time_fc2_.bias;

  Eigen::MatrixXf x = silu(conv3x3(stem_, input, rows, cols));
  for (const auto& b : blocks_) {
    Eigen::MatrixXf h = conv3x3(b.conv1, x, rows, cols);
    const Eigen::VectorXf bias = b.time_proj.weight * temb + b.time_proj.bias;
    h.colwise() += bias;
    x += conv3x3(b.conv2, silu(h), rows, cols);
  }
  Eigen::MatrixXf out = conv3x3(head_, x, rows, cols);
  if (!out.allFinite()) throw std::runtime_error("TinyCondNet: non-finite activations");
  return out;
}

Cine TinyCondNet::predict(const DenoiserInput& in) const {
  check_input(in);
  if (in.noisy.frames() != group_) {
    throw std::invalid_argument("TinyCondNet: expected " + std::to_string(group_) + " channels");
  }
  const Index g = group_;
  Eigen::MatrixXf input(2 * g, in.noisy.pixels());
  input.topRows(g) = in.noisy.data().matrix().cast<float>();
  input.bottomRows(g) = in.condition.data().matrix().cast<float>();
  const Eigen::MatrixXf eps = forward(input, in.noisy.rows(), in.noisy.cols(), in.timestep);
  return Cine(in.noisy.rows(), in.noisy.cols(), eps.array().cast<double>());
}

}  // namespace cinediff
