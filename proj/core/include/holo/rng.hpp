#pragma once

#include <cstdint>
#include <limits>

namespace holo {

__extension__ typedef unsigned __int128 uint128;

/// PCG64 (XSL-RR 128/64). Satisfies UniformRandomBitGenerator so it can
/// drive the <random> distributions; the seeding sequence is fixed so a
/// given seed yields the same stream on every platform.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  explicit Pcg64(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
    increment_ = (static_cast<uint128>(stream) << 1u) | 1u;
    increment_ ^= kDefaultIncrement;
    increment_ |= 1u;
    state_ = 0;
    step();
    state_ += seed;
    step();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    step();
    const auto hi = static_cast<std::uint64_t>(state_ >> 64u);
    const auto lo = static_cast<std::uint64_t>(state_);
    const unsigned rot = static_cast<unsigned>(state_ >> 122u);
    const std::uint64_t x = hi ^ lo;
    return (x >> rot) | (x << ((64u - rot) & 63u));
  }

 private:
  static constexpr uint128 kMultiplier =
      (static_cast<uint128>(0x2360ed051fc65da4ULL) << 64u) |
      0x4385df649fccf645ULL;
  static constexpr uint128 kDefaultIncrement =
      (static_cast<uint128>(0x5851f42d4c957f2dULL) << 64u) |
      0x14057b7ef767814fULL;

  void step() noexcept { state_ = state_ * kMultiplier + increment_; }

  uint128 state_;
  uint128 increment_;
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Pcg64& rng) noexcept {
  return static_cast<double>(rng() >> 11u) * 0x1.0p-53;
}

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30u)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27u)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31u);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b);
}

}  // namespace holo
