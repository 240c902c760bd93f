/**
 * @file rng.hpp
 * @brief Deterministic 64-bit generator (xoshiro256**) with derived
 *        substreams, plus the Box-Muller Gaussian pair.
 *
 * Every random draw in the library flows from a (seed, stream_id) pair. The
 * 256-bit state is filled from a SplitMix64 chain keyed on both values, so
 * the same pair reproduces the same byte sequence on any platform and
 * distinct stream ids give statistically independent sequences.
 */
#ifndef SBEAM_RNG_HPP
#define SBEAM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>

namespace sbeam {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    // Key the SplitMix chain on the stream id before expanding the state.
    std::uint64_t sm = seed;
    std::uint64_t mix = detail::splitmix64(sm) ^ (stream_id * 0xda942042e4dd58b5ULL);
    std::uint64_t sm2 = mix;
    for (auto& word : s_) word = detail::splitmix64(sm2);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound) {
    // Modulo bias is < 2^-53 * bound here; bounds in this codebase are tiny.
    return next_u64() % bound;
  }

  /// Two independent standard normal draws via the Box-Muller transform.
  std::pair<double, double> gaussian_pair() {
    const double u1 = 1.0 - uniform01();  // (0, 1], safe for the log
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
};

/// Documented child-seed derivation: child = f(master, module name, index).
/// Used by the harness so every stage draws from its own root.
std::uint64_t derive_seed(std::uint64_t master_seed, const char* module_name,
                          std::uint64_t index);

}  // namespace sbeam

#endif  // SBEAM_RNG_HPP
