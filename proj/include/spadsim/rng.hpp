#pragma once

#include <cmath>
#include <cstdint>

#include "spadsim/errors.hpp"

namespace spadsim {

// Counter-based RNG. Every random draw in this library is a pure function of
// (seed, stream coordinates, draw index), so results are independent of
// thread count, scheduling, and evaluation order.
//
// The mixing function is Philox4x32-10 (Salmon, Moraes, Dror, Shaw,
// "Parallel Random Numbers: As Easy as 1, 2, 3", SC'11): ten rounds of a
// 32x32->64-bit multiply Feistel over a 128-bit counter under a 64-bit key.
// The implementation is frozen by known-answer tests; changing any constant
// silently reshuffles every dataset, so don't.

namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

inline void round_once(std::uint32_t ctr[4], std::uint32_t k0,
                       std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr[0] = hi1 ^ ctr[1] ^ k0;
  ctr[1] = lo1;
  ctr[2] = hi0 ^ ctr[3] ^ k1;
  ctr[3] = lo0;
}

}  // namespace philox

/// Philox4x32-10: encrypts a 128-bit counter under a 64-bit key into 128
/// uniformly random bits.
inline void philox4x32_10(const std::uint32_t ctr_in[4],
                          const std::uint32_t key_in[2],
                          std::uint32_t out[4]) {
  std::uint32_t c[4] = {ctr_in[0], ctr_in[1], ctr_in[2], ctr_in[3]};
  std::uint32_t k0 = key_in[0];
  std::uint32_t k1 = key_in[1];
  philox::round_once(c, k0, k1);
  for (int r = 1; r < 10; ++r) {
    k0 += philox::kWeyl0;
    k1 += philox::kWeyl1;
    philox::round_once(c, k0, k1);
  }
  out[0] = c[0];
  out[1] = c[1];
  out[2] = c[2];
  out[3] = c[3];
}

/// Coordinates identifying one pixel draw stream. x must stay below 2^30:
/// the channel index is packed into the top bits of the x word.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint32_t frame = 0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint8_t channel = 0;
};

/// A lazily generated stream of random values. Blocks of 128 bits are
/// produced by bumping counter word 0; all other counter words and the key
/// encode the stream identity.
class Stream {
 public:
  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on (0, 1]: never returns 0, so log() is always finite.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Exponential with the given rate (rate > 0).
  double exponential(double rate) {
    return -std::log(uniform_open01()) / rate;
  }

  /// Standard normal (Box-Muller, cosine branch; one draw per call pair).
  double normal() {
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  static Stream from_raw(const std::uint32_t ctr[4],
                         const std::uint32_t key[2]) {
    Stream s;
    s.key_[0] = key[0];
    s.key_[1] = key[1];
    for (int i = 0; i < 4; ++i) s.ctr_[i] = ctr[i];
    return s;
  }

 private:
  void refill() {
    philox4x32_10(ctr_, key_, buf_);
    ++ctr_[0];  // draw index; wrap unreachable (2^32 blocks per stream)
    pos_ = 0;
  }

  std::uint32_t key_[2] = {0, 0};
  std::uint32_t ctr_[4] = {0, 0, 0, 0};
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int pos_ = 4;
};

/// Stream for one (seed, frame, pixel, channel) tuple.
/// Layout: key = {seed_lo, seed_hi}, ctr = {0, frame, x | channel<<30, y}.
inline Stream derive_stream(const RngKey& key) {
  if (key.x >= (1u << 30))
    throw InputError("RngKey: x must be < 2^30 (channel packs above it)");
  if (key.channel > 3) throw InputError("RngKey: channel must be 0..3");
  const std::uint32_t k[2] = {static_cast<std::uint32_t>(key.seed),
                              static_cast<std::uint32_t>(key.seed >> 32)};
  const std::uint32_t c[4] = {
      0, key.frame,
      key.x | (static_cast<std::uint32_t>(key.channel) << 30), key.y};
  return Stream::from_raw(c, k);
}

/// Auxiliary stream for non-pixel randomness (augment parameter draws and
/// the like). The key's top bit is flipped so these can never collide with a
/// pixel stream under the same seed.
inline Stream derive_task_stream(std::uint64_t seed, std::uint32_t tag,
                                 std::uint64_t index) {
  const std::uint32_t k[2] = {
      static_cast<std::uint32_t>(seed),
      static_cast<std::uint32_t>(seed >> 32) ^ 0x80000000u};
  const std::uint32_t c[4] = {0, tag, static_cast<std::uint32_t>(index),
                              static_cast<std::uint32_t>(index >> 32)};
  return Stream::from_raw(c, k);
}

inline constexpr std::uint32_t kTaskTagAugment = 1;

/// splitmix64 finalizer. Used for seed-independent decisions keyed on an
/// integer id (train/val assignment).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace spadsim
