#pragma once

#include <cstdint>
#include <random>

namespace specsense {

/// Seeded random source. Uniform, Gaussian and exponential variates are
/// derived here from raw 64-bit draws so sequences are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Seed for stream `index` of a master seed (splitmix64 finalizer). Streams
/// depend only on (master, index), never on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace specsense
