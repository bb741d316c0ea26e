#pragma once

#include <cstdint>
#include <random>

namespace elflab {

// Mixes (master, stream, index) into an engine seed. SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

// Streams are defined by mt19937_64 output plus the conversions below, so they
// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // 53 random bits mapped to [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // uniform() < p  <=>  (bits() >> 11) < threshold(p), for p in [0, 1].
  static std::uint64_t threshold(double p);
  bool hit(std::uint64_t thr) { return (engine_() >> 11) < thr; }

  // Unbiased integer in [0, n), multiply-shift with rejection.
  int index(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace elflab
