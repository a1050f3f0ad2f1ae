#pragma once

// Counter-based random streams.
//
// Generator: "splitmix64-ctr", version 1. Draw i (i = 1, 2, ...) of a stream
// with key K is mix64(K + i * 0x9E3779B97F4A7C15), where mix64 is the
// SplitMix64 output finalizer. A stream is therefore fully described by
// (key, counter) and can be positioned anywhere without replaying.
//
// Stream derivation: stream_for(master, r) uses key
//   mix64(master ^ mix64(r + 0xD1B54A32D192ED03)).
// Both the generator name/version and the derivation string are written to
// experiment manifests.
//
// Continuous variates are built from raw bits here rather than through
// <random> distributions, whose algorithms are implementation-defined.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace srms {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kGeneratorName = "splitmix64-ctr";
  static constexpr int kGeneratorVersion = 1;
  static constexpr std::string_view kStreamDerivation =
      "key = mix64(master ^ mix64(replicate + 0xD1B54A32D192ED03))";

  constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr CounterRng stream_for(std::uint64_t master, std::uint64_t replicate) noexcept {
    return CounterRng(mix64(master ^ mix64(replicate + 0xD1B54A32D192ED03ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard exponential, strictly positive.
  double exponential() noexcept { return -std::log(uniform_open()); }

  int rademacher() noexcept { return ((*this)() >> 63) != 0 ? 1 : -1; }

  /// Uniform integer on {0, ..., n-1}; multiply-shift, bias below 2^-64 * n.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace srms
