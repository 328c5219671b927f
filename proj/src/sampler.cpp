#include "cinediff/sampler.hpp"

#include "cinediff/operators.hpp"
#include "cinediff/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace cinediff {

void EnhanceConfig::validate() const {
  if (train_steps < 2) throw std::invalid_argument("enhance: train_steps must be >= 2");
  if (respace_steps < 1 || respace_steps > train_steps) {
    throw std::invalid_argument("enhance: respace_steps must lie in [1, train_steps]");
  }
  if (infer_steps < 0 || infer_steps > respace_steps) {
    throw std::invalid_argument("enhance: infer_steps must lie in [0, respace_steps]");
  }
  if (group < 1) throw std::invalid_argument("enhance: group must be >= 1");
  if (eta != 0.0 && eta != 1.0) throw std::invalid_argument("enhance: eta must be 0 or 1");
  if (!(percentile > 0.0 && percentile <= 1.0)) throw std::invalid_argument("enhance: percentile must lie in (0, 1]");
  if (threads < 1) throw std::invalid_argument("enhance: threads must be >= 1");
}

double quantile(const Eigen::Ref<const Eigen::ArrayXd>& values, double p) {
  if (values.size() == 0) throw std::invalid_argument("quantile: empty input");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::ranges::sort(v);
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

NormalizationRecord fit_normalization(const Cine& video, double percentile) {
  const Eigen::Map<const Eigen::ArrayXd> flat(video.data().data(), video.size());
  const double q = quantile(flat, percentile);
  if (!(q > 0.0)) throw std::invalid_argument("fit_normalization: quantile of the video is not positive");
  return {q, percentile};
}

long long expected_nfe(int frames, int group, int steps) {
  return static_cast<long long>((frames + group - 1) / group) * steps;
}

Cine ccdf_start(const Cine& group, int i0, const RespacedSchedule& schedule, std::mt19937_64& rng) {
  Cine::Storage eps(group.frames(), group.pixels());
  fill_normal(eps, rng);
  return Cine(group.rows(), group.cols(), q_sample(group.data(), i0, eps, schedule));
}

Cine enhance_window(const Cine& condition, const std::vector<int>& frames, int window_index, const EnhanceConfig& cfg,
                    const RespacedSchedule& schedule, const Denoiser& denoiser,
                    const NormalizationRecord& normalization) {
  const auto w = static_cast<std::uint64_t>(window_index);
  const int i0 = cfg.infer_steps;
  if (i0 == 0) return condition;

  auto start_rng = substream(cfg.seed, StreamTag::CcdfStart, {w});
  Cine x = ccdf_start(condition, i0, schedule, start_rng);
  Cine::Storage z = Cine::Storage::Zero(x.frames(), x.pixels());

  for (int i = i0; i >= 1; --i) {
    const DenoiserInput in{x, condition, i, schedule.timestep(i), schedule.alpha_bar(i), frames, &normalization};
    const Cine eps = denoiser.predict(in);
    if (!eps.same_shape(x)) {
      throw std::runtime_error(denoiser.name() + " returned a mis-shaped prediction at window " +
                               std::to_string(window_index) + ", step " + std::to_string(i));
    }
    if (cfg.eta != 0.0 && i > 1) {
      auto rng = substream(cfg.seed, StreamTag::PosteriorNoise, {w, static_cast<std::uint64_t>(i)});
      fill_normal(z, rng);
    }
    x = Cine(x.rows(), x.cols(), posterior_step(x.data(), eps.data(), i, schedule, z, cfg.eta));
    if (!x.data().allFinite()) {
      throw std::runtime_error("non-finite value in window " + std::to_string(window_index) + " at step " +
                               std::to_string(i));
    }
  }
  return x;
}

EnhanceResult enhance_video(const Cine& dlrecon, const SamplingMask& mask, const EnhanceConfig& cfg,
                            const Denoiser& denoiser) {
  cfg.validate();
  if (mask.frames() != dlrecon.frames() || mask.lines() != dlrecon.rows()) {
    throw std::invalid_argument("enhance: mask shape does not match the video");
  }
  if (!dlrecon.data().allFinite()) throw std::invalid_argument("enhance: initial reconstruction is not finite");
  const auto started = std::chrono::steady_clock::now();

  EnhanceResult result;
  result.stats.steps = cfg.infer_steps;
  result.stats.frames = static_cast<int>(dlrecon.frames());

  Cine merged;
  if (cfg.infer_steps == 0) {
    merged = dlrecon;
    result.stats.windows = plan_windows(static_cast<int>(dlrecon.frames()), cfg.group).num_windows();
  } else {
    const NoiseSchedule base = make_schedule(cfg.schedule, cfg.train_steps, cfg.s_offset);
    const RespacedSchedule schedule = respace(base, cfg.respace_steps);
    result.normalization = fit_normalization(dlrecon, cfg.percentile);

    const Windows windows = window(result.normalization.forward(dlrecon), cfg.group);
    const int count = windows.plan.num_windows();
    std::vector<Cine> outputs(static_cast<std::size_t>(count));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (int w = next++; w < count; w = next++) {
        try {
          const auto uw = static_cast<std::size_t>(w);
          outputs[uw] = enhance_window(windows.groups[uw], windows.plan.windows[uw], w, cfg, schedule, denoiser,
                                       result.normalization);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    };
    const int workers = std::min(cfg.threads, count);
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    merged = result.normalization.inverse(ungroup(outputs, windows.plan));
    result.stats.windows = count;
    result.stats.nfe = static_cast<long long>(count) * cfg.infer_steps;
  }

  if (cfg.pdc) {
    result.pre_projection = pseudo_dc_complex(merged, dlrecon, mask);
    result.enhanced = project_magnitude(*result.pre_projection);
  } else {
    result.enhanced = Cine(merged.rows(), merged.cols(), merged.data().max(0.0));
  }
  result.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

EnhanceResult enhance_video(const KSpaceData& kspace, const InitialReconstructor& recon, const EnhanceConfig& cfg,
                            const Denoiser& denoiser) {
  return enhance_video(recon(kspace), kspace.mask, cfg, denoiser);
}

}  // namespace cinediff
