#pragma once

#include <cstdint>
#include <random>

// Counter-keyed random streams. Each (master seed, trajectory, channel)
// triple names an independent generator, so trajectories can be integrated
// in any order, on any number of workers, and still draw identical numbers.

namespace qsp::rng {

/// SplitMix64 finalizer; decorrelates structured seed inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory,
                                 std::uint64_t channel) {
  return splitmix64(splitmix64(splitmix64(master) ^ trajectory) ^ channel);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t master, std::uint64_t trajectory = 0,
                     std::uint64_t channel = 0)
      : engine_(derive_seed(master, trajectory, channel)) {}

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  /// Uniform on [-1, 1).
  double uniform_symmetric() { return 2.0 * uniform_(engine_) - 1.0; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace qsp::rng
