#pragma once

#include <cstdint>
#include <random>

namespace fpih {

// splitmix64; used to derive independent stream seeds from (seed, ids).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (a + 0x165667b19e3779f9ULL));
  h = splitmix64(h ^ (b + 0x27220a95fe791145ULL));
  h = splitmix64(h ^ (c + 0x8ebc6af09c88c6e3ULL));
  return h;
}

// One sequential random stream. Each environment / episode / sampler owns its
// own stream so parallel execution never shares generator state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double normal(double mu, double sigma) { return mu + sigma * normal_(gen_); }
  double uniform01() { return uniform_(gen_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(gen_); }
  std::uint64_t bits() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fpih
