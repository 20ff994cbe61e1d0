#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "vlab/errors.hpp"

namespace vlab {

using u128 = unsigned __int128;

// splitmix64 finalizer. Statelessly hashes distinct inputs to well-mixed
// 64-bit words; the basis of every random stream in the library.
inline std::uint64_t sm_finalize(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Order-sensitive hash of (seed, stream, counter). Used directly for
// counter-indexed words so results never depend on generation order.
inline std::uint64_t mix3(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t ctr) noexcept {
  std::uint64_t h = sm_finalize(seed ^ 0x243F6A8885A308D3ULL);
  h = sm_finalize(h ^ stream);
  h = sm_finalize(h ^ ctr);
  return h;
}

inline double bits_to_unit(std::uint64_t w) noexcept {
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// Counter-based generator: state is (seed, stream, counter), so any draw is
// reproducible from its indices alone and streams never collide.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() noexcept { return mix3(seed_, stream_, ctr_++); }

  // Uniform on [0,1), 53 random bits.
  double uniform01() noexcept { return bits_to_unit(next_u64()); }

  double uniform(double a, double b) noexcept {
    return a + (b - a) * uniform01();
  }

  // Uniform index in [0, n). Fixed-point multiply, no rejection loop, so the
  // draw count per call is always one.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) *
                                       static_cast<u128>(n)) >> 64);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t ctr_ = 0;
};

// Exact base angle stream. Represents a point theta in [0,1) by its full
// binary expansion and walks the expansion under theta -> 2^bits * theta
// mod 1, so long orbits of the base map carry no accumulated rounding.
// Backends:
//   random      words are counter-hashed, a Lebesgue-typical point
//   rational    exact long division of num/den
//   prefixed    first digits in base 2^log2d fixed, random tail
//   from_double the terminating expansion of a double (zero tail), so
//               dyadic points like theta = 0 stay exactly periodic
class ThetaStream {
 public:
  static ThetaStream random(std::uint64_t seed, std::uint64_t stream) {
    ThetaStream s;
    s.kind_ = Kind::Random;
    s.seed_ = seed;
    s.stream_ = stream;
    return s;
  }

  static ThetaStream rational(u128 num, u128 den) {
    if (den == 0 || num >= den)
      throw PreconditionViolated("rational theta needs 0 <= num/den < 1");
    if (den >> 96)
      throw PreconditionViolated("rational theta denominator above 2^96");
    ThetaStream s;
    s.kind_ = Kind::Rational;
    s.den_ = den;
    s.rem_ = num;
    return s;
  }

  // Digits are base-2^log2d, most significant first: the itinerary prefix of
  // a point in a depth digits.size() cylinder of the base-d map.
  static ThetaStream prefixed(int log2d, const std::vector<int>& digits,
                              std::uint64_t seed, std::uint64_t stream) {
    if (log2d < 1 || log2d > 20)
      throw PreconditionViolated("prefixed theta needs 1 <= log2d <= 20");
    ThetaStream s;
    s.kind_ = Kind::Prefixed;
    s.seed_ = seed;
    s.stream_ = stream;
    s.prefixBits_ = static_cast<std::size_t>(digits.size()) * log2d;
    std::size_t nWords = (s.prefixBits_ + 63) / 64;
    s.prefix_.assign(nWords, 0);
    std::size_t bit = 0;
    for (int dgt : digits) {
      if (dgt < 0 || dgt >= (1 << log2d))
        throw IndexOutOfRange("digit outside base range");
      for (int b = log2d - 1; b >= 0; --b) {
        if ((dgt >> b) & 1)
          s.prefix_[bit / 64] |= (1ULL << (63 - bit % 64));
        ++bit;
      }
    }
    return s;
  }

  static ThetaStream from_double(double theta0) {
    if (!(theta0 >= 0.0 && theta0 < 1.0))
      throw PreconditionViolated("theta must lie in [0,1)");
    ThetaStream s;
    s.kind_ = Kind::FromDouble;
    s.value_ = theta0;
    return s;
  }

  // Current point: the first 53 bits of the expansion at the read head. For
  // backends with longer expansions this truncates the exact real value
  // toward zero.
  double theta() const {
    std::size_t j = pos_ / 64;
    int r = static_cast<int>(pos_ % 64);
    std::uint64_t w = word(j);
    if (r != 0) w = (w << r) | (word(j + 1) >> (64 - r));
    return bits_to_unit(w);
  }

  // Applies theta -> 2^bits theta mod 1.
  void advance(int bits) { pos_ += static_cast<std::size_t>(bits); }

  std::size_t position() const noexcept { return pos_; }

 private:
  enum class Kind { Random, Rational, Prefixed, FromDouble };

  ThetaStream() = default;

  // 64 expansion bits starting at position 64*j, most significant first.
  std::uint64_t word(std::size_t j) const {
    switch (kind_) {
      case Kind::Random:
        return mix3(seed_, stream_, j);
      case Kind::Rational: {
        while (words_.size() <= j) {
          std::uint64_t w = 0;
          for (int c = 0; c < 2; ++c) {
            rem_ <<= 32;
            w = (w << 32) | static_cast<std::uint64_t>(rem_ / den_);
            rem_ %= den_;
          }
          words_.push_back(w);
        }
        return words_[j];
      }
      case Kind::Prefixed: {
        std::uint64_t tail = mix3(seed_, stream_ ^ 0x5851F42D4C957F2DULL, j);
        if (j * 64 >= prefixBits_) return tail;
        std::uint64_t head = prefix_[j];
        std::size_t headBits = prefixBits_ - j * 64;
        if (headBits >= 64) return head;
        std::uint64_t maskLo = (1ULL << (64 - headBits)) - 1;
        return head | (tail & maskLo);
      }
      case Kind::FromDouble: {
        if (value_ == 0.0) return 0;
        int e;
        double m = std::frexp(value_, &e);  // value = m * 2^e, m in [1/2,1)
        auto mant = static_cast<std::uint64_t>(m * 0x1.0p53);  // 53 bits
        // Want floor(value * 2^(64(j+1))) mod 2^64 = mant * 2^s mod 2^64
        // with s = e - 53 + 64(j+1).
        long long s =
            static_cast<long long>(e) - 53 + 64 * (static_cast<long long>(j) + 1);
        if (s >= 64 || s <= -64) return 0;
        if (s >= 0)
          return static_cast<std::uint64_t>(static_cast<u128>(mant) << s);
        return mant >> (-s);
      }
    }
    return 0;
  }

  Kind kind_ = Kind::Random;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  u128 den_ = 0;
  mutable u128 rem_ = 0;
  mutable std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> prefix_;
  std::size_t prefixBits_ = 0;
  double value_ = 0.0;
  std::size_t pos_ = 0;
};

} // namespace vlab
