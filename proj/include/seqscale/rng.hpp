#pragma once

// ============================================================================
// Deterministic, platform-stable random number utilities.
//
// Every stochastic component in the project (simulator draws, bootstrap
// resampling, mock-provider fabrication, parallel-chain sampling nonces)
// derives its stream from one master seed through derive_seed(), so a run is
// reproducible bit-for-bit from a single --seed value.  splitmix64 is used
// instead of <random> engines/distributions because the standard library
// leaves distribution algorithms implementation-defined, which would break
// cross-toolchain reproducibility of frozen test fixtures.
// ============================================================================

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace seqscale::rng {

/** FNV-1a 64-bit hash; used for request digests and string-tagged seeds. */
inline constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/**
 * splitmix64: tiny, high-quality 64-bit generator with a one-word state.
 * Reference sequence is locked by unit tests; the Python oracle used to
 * freeze bootstrap fixtures replicates it verbatim.
 */
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /** Uniform draw in [0, 1) with 53 bits of precision. */
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /** Uniform draw in (0, 1] (never zero; safe as a log argument). */
  double uniform01_open_low() { return 1.0 - uniform01(); }

  /** Uniform integer in [0, n). n must be ≥ 1. */
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /** Bernoulli draw. */
  bool bernoulli(double p) { return uniform01() < p; }

  /**
   * Normal draw via Box-Muller.  Both underlying uniforms are consumed on
   * every call (no caching) so the stream position is input-independent.
   */
  double normal(double mean, double stddev) {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    const double z =
        std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
  }

 private:
  std::uint64_t state_;
};

/**
 * Child-seed derivation rule (documented in the README):
 *   child = splitmix64_next(base + 0x9E3779B97F4A7C15 * (salt + 1))
 * String salts are first hashed with FNV-1a 64.  The +1 keeps salt 0 from
 * colliding with the undisturbed base stream.
 */
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::uint64_t salt) {
  SplitMix64 g(base + 0x9E3779B97F4A7C15ULL * (salt + 1));
  return g.next();
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::string_view tag) {
  return derive_seed(base, fnv1a64(tag));
}

}  // namespace seqscale::rng
