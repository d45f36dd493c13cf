#pragma once

#include <cstdint>
#include <random>

namespace dcm {

/// SplitMix64 finalizer. Used both for seed derivation and as the node hash
/// of the HyperLogLog counters.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a stream index.
/// Streams derived from the same parent with distinct indices do not overlap
/// in practice; derivation can be chained (replicate -> phase -> chunk).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Seedable 64-bit generator with portable helpers. Only the engine's raw
/// output is used so that streams are bit-identical across standard
/// libraries (the std distributions are implementation-defined), except for
/// poisson() which defers to std::poisson_distribution.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dcm
