// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

namespace ncstat {

/// SplitMix64 output function (Stafford's mix13 with the golden-gamma
/// increment). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key; its j-th output (j = 0, 1, ...)
/// is mix64(key + (j + 1) * kGoldenGamma), so any draw can be produced
/// without generating the ones before it. Sub-streams are derived with
///
///   key(seed, index) = mix64(mix64(seed) ^ mix64(index + kGoldenGamma))
///
/// which gives every (seed, trial) pair its own stream, independent of the
/// order in which trials are executed. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr CounterRng stream(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(mix64(mix64(seed) ^ mix64(index + kGoldenGamma)));
  }

  /// Child stream `index` of this one.
  constexpr CounterRng split(std::uint64_t index) const { return stream(key_, index); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return mix64(key_ + (++counter_) * kGoldenGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ncstat
