#pragma once

#include <cstdint>
#include <random>

namespace dmr {

// Seedable generator used by every simulation in this project: a mt19937_64
// engine (fully specified by the standard, so streams are identical across
// platforms) with hand-rolled uniform and normal transforms, because the
// standard library's distributions are implementation defined.
//
// Stream splitting: replication r of base seed s draws from the engine
// seeded with splitmix64(s + GOLDEN * (r + 1)), making replications
// independent of execution order and thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t split(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
  }

  static Rng for_replication(std::uint64_t seed, std::uint64_t replication) {
    return Rng(split(seed, replication));
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  bool bernoulli(double prob) { return uniform() < prob; }

  // Uniform integer in [lo, hi] by rejection-free scaling; fine for the
  // small ranges used here.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dmr
