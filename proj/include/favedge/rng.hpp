#pragma once

#include <bit>
#include <cstdint>
#include <limits>

namespace favedge {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

/// Identifies one reproducible random stream.
struct SeedPair {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const SeedPair&, const SeedPair&) = default;
};

/// Counter-based generator: word i of stream (seed, stream) is
/// mix64(key + (i + 1) * gamma) with key derived through SplitMix64.
/// Any word can be computed without touching the others, so replicas never
/// coordinate and results do not depend on the platform or thread layout.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng() noexcept : CounterRng(SeedPair{}) {}
  constexpr explicit CounterRng(SeedPair seeds) noexcept
      : key_(derive_key(seeds)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return mix64(key_ + (++counter_) * kGoldenGamma);
  }

  /// Word at an absolute counter position, without advancing.
  constexpr result_type at(std::uint64_t index) const noexcept {
    return mix64(key_ + (index + 1) * kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }
  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  static constexpr std::uint64_t derive_key(SeedPair s) noexcept {
    return mix64(s.master_seed + kGoldenGamma) ^
           mix64(mix64(s.stream_index ^ 0x6a09e667f3bcc909ull) + kGoldenGamma);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fair bit stream over a CounterRng; bits are consumed LSB-first.
class BitSource {
 public:
  explicit BitSource(SeedPair seeds) noexcept : rng_(seeds) {}

  /// Peeks the next 8 bits without consuming them.
  unsigned peek8() noexcept {
    if (avail_ < 8) refill();
    return static_cast<unsigned>(buf_ & 0xffu);
  }

  /// Peeks the next 32 bits without consuming them.
  std::uint32_t peek32() noexcept {
    if (avail_ < 32) refill();
    return static_cast<std::uint32_t>(buf_);
  }

  void consume(unsigned bits) noexcept {
    buf_ >>= bits;
    avail_ -= bits;
  }

  bool next_bit() noexcept {
    if (avail_ == 0) refill();
    const bool b = (buf_ & 1u) != 0;
    buf_ >>= 1;
    --avail_;
    return b;
  }

  CounterRng& rng() noexcept { return rng_; }

 private:
  void refill() noexcept {
    buf_ |= static_cast<unsigned __int128>(rng_()) << avail_;
    avail_ += 64;
  }

  CounterRng rng_;
  unsigned __int128 buf_ = 0;
  unsigned avail_ = 0;
};

/// The fair +-1 step sequence of one walk; step i uses bit (i mod 64) of
/// word i / 64, so the sequence is a pure function of (seeds, i).
class StepGenerator {
 public:
  explicit StepGenerator(SeedPair seeds) noexcept : rng_(seeds) {}

  int next() noexcept {
    if ((counter_ & 63u) == 0) word_ = rng_();
    const int s = static_cast<int>((word_ >> (counter_ & 63u)) & 1u) * 2 - 1;
    ++counter_;
    return s;
  }

  /// Next 64 steps packed as bits (1 = up); requires counter % 64 == 0.
  std::uint64_t next_word() noexcept {
    counter_ += 64;
    return rng_();
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  CounterRng rng_;
  std::uint64_t word_ = 0;
  std::uint64_t counter_ = 0;
};

/// Number of zero bits before the `ones`-th one bit in a fair bit stream,
/// which is a sum of `ones` independent Geometric(1/2) variables on {0,1,...}.
/// Unused bits of the last word are discarded.
inline std::uint64_t negative_binomial_half(CounterRng& rng,
                                            std::uint64_t ones) noexcept {
  std::uint64_t zeros = 0;
  while (ones > 0) {
    const std::uint64_t w = rng();
    const auto c = static_cast<std::uint64_t>(std::popcount(w));
    if (c < ones) {
      zeros += 64 - c;
      ones -= c;
      continue;
    }
    // Position of the ones-th set bit of w.
    std::uint64_t v = w;
    for (std::uint64_t r = 1; r < ones; ++r) v &= v - 1;
    const auto pos = static_cast<std::uint64_t>(std::countr_zero(v));
    zeros += pos + 1 - ones;
    ones = 0;
  }
  return zeros;
}

}  // namespace favedge
