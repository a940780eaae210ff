#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tunefree {

// Counter-based splittable random stream built on Philox4x32-10
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
//
// A stream is identified by (seed, substream_id): the Philox key is derived
// from the seed, and the 128-bit block counter is (counter, substream_id).
// Replaying a stream with the same identity reproduces bit-identical draws;
// distinct substream ids give statistically independent streams. Streams are
// cheap value types, safe to copy and hand to parallel workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t substream_id = 0)
      : seed_(seed), substream_(substream_id) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
  }

  // Derive an independent child stream. Children of distinct ids (and of
  // distinct parents) get distinct substream ids via a splitmix64 step.
  RngStream child(std::uint64_t id) const {
    return RngStream(seed_, mix64(substream_ + 0x9E3779B97F4A7C15ULL * (id + 1)));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream_id() const { return substream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    if (buf_pos_ >= 2) refill();
    return buf_[buf_pos_++];
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes exactly two 64-bit draws.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t* lo,
                        std::uint32_t* hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *lo = static_cast<std::uint32_t>(p);
    *hi = static_cast<std::uint32_t>(p >> 32);
  }

  void refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(substream_),
        static_cast<std::uint32_t>(substream_ >> 32),
    };
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t lo0, hi0, lo1, hi1;
      mul_hi_lo(0xD2511F53u, ctr[0], &lo0, &hi0);
      mul_hi_lo(0xCD9E8D57u, ctr[2], &lo1, &hi1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    buf_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    buf_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
    buf_pos_ = 0;
    ++counter_;
  }

  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint64_t, 2> buf_ = {0, 0};
  int buf_pos_ = 2;
};

}  // namespace tunefree
