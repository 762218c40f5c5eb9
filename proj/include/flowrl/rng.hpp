#pragma once

#include <cstdint>
#include <random>

namespace flowrl {

// Deterministic random source. The real/int mappings are spelled out here
// instead of using std distributions, whose output is implementation-defined;
// this keeps seeded sequences identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t nextU64() { return gen_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased via rejection.
  int uniformInt(int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = nextU64();
    while (x >= limit) x = nextU64();
    return static_cast<int>(x % bound);
  }

  // Uniform integer in [lo, hi], inclusive.
  int uniformInt(int lo, int hi) { return lo + uniformInt(hi - lo + 1); }

 private:
  std::mt19937_64 gen_;
};

// SplitMix64 mix; used to derive independent substream seeds from one master
// seed so that changing one knob (topology, traffic, policy, init, replay)
// does not perturb the others.
inline std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace seedstream {
constexpr std::uint64_t kTopology = 1;
constexpr std::uint64_t kTraffic = 2;
constexpr std::uint64_t kPolicy = 3;
constexpr std::uint64_t kInit = 4;
constexpr std::uint64_t kReplay = 5;
}  // namespace seedstream

}  // namespace flowrl
