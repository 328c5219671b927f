#ifndef CINEDIFF_RNG_HPP
#define CINEDIFF_RNG_HPP

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace cinediff {

// Purpose tags keep substreams used for different things disjoint even when
// the remaining keys coincide.
enum class StreamTag : std::uint64_t {
  PhantomGeometry = 1,
  CoilPhase = 2,
  MaskLines = 3,
  KSpaceNoise = 4,
  CcdfStart = 5,
  PosteriorNoise = 6,
  Weights = 7,
};

// Independent generator keyed by (seed, tag, keys...). Draws depend only on
// the key tuple, never on which thread or in which order streams are made.
inline std::mt19937_64 substream(std::uint64_t seed, StreamTag tag,
                                 std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (keys.size() + 2));
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  push(static_cast<std::uint64_t>(tag));
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

template <typename Derived>
void fill_normal(Eigen::DenseBase<Derived>& out, std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = normal(rng);
    }
  }
}

}  // namespace cinediff

#endif  // CINEDIFF_RNG_HPP
