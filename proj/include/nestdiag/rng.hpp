#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace nestdiag {

/// SplitMix64 finaliser; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the `index`-th independent task spawned from `seed`.
///
/// derive_seed(s, i) = splitmix64(splitmix64(s) + (i + 1) * 0x9E3779B97F4A7C15).
/// Every stochastic loop in the library (bootstrap replications, runs in a
/// sweep, simulated log X rows) seeds task i with derive_seed(seed, i), so
/// results do not depend on how tasks are scheduled.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Random source used everywhere in the library: a 64-bit Mersenne twister
/// (std::mt19937_64) with library-owned conversions to uniforms and normals,
/// so draws are identical across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Exceptions thrown by body are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace nestdiag
