#pragma once

// Seeded random streams. Every Monte Carlo path in the library draws from a
// Stream constructed from (master seed, stream index) through derive_seed, so
// results never depend on thread scheduling.

#include <cmath>
#include <cstdint>
#include <random>

namespace doqos {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`: splitmix64(master ^ splitmix64(index)).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index));
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t master, std::uint64_t index) : engine_(derive_seed(master, index)) {}

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [-pi, pi).
  double phase() noexcept { return (2.0 * uniform() - 1.0) * 3.14159265358979323846; }

  /// Exponential with the given mean (inverse CDF).
  double exponential(double mean) noexcept { return -mean * std::log(uniform()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace doqos
