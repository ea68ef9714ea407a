#pragma once

#include <cstdint>
#include <random>

namespace ldp {

// SplitMix64 step, used to spread (seed, stream, salt) into engine seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// One RNG substream per sample path, derived deterministically from
// (master seed, path index, salt).  Every path owns its engine and fresh
// distribution state, so results cannot depend on how paths are scheduled
// across threads.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt = 0)
      : eng_(splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc908ULL) ^
                        splitmix64(stream) ^ splitmix64(salt ^ 0xbb67ae8584caa73bULL))) {}

  double gaussian() { return normal_(eng_); }

  long long poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<long long> d(mean);
    return d(eng_);
  }

  double uniform() { return unif_(eng_); }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace ldp
