#pragma once

// Counter-based random number generation built on Philox4x32-10
// (Salmon, Moraes, Dror, Shaw; SC'11). Every draw is a pure function of
// (master seed, domain tag, stream index, counter), which gives:
//   * per-trial streams that are independent of thread scheduling,
//   * per-pair edge draws that are independent of enumeration order,
//   * bitwise reproducibility of whole experiments from one 64-bit seed.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace softgeo::rng {

// Separates unrelated uses of the same (seed, stream). Pair retention marks
// deliberately share EdgeDraw: slicing a coupled edge process at radius r
// then reproduces the sampled step graph at that radius, mark for mark.
enum class Domain : uint32_t {
  PointCoords = 0x01,
  PoissonCount = 0x02,
  EdgeDraw = 0x03,
  Generic = 0x05,
};

struct Philox4x32 {
  static constexpr uint32_t M0 = 0xD2511F53u;
  static constexpr uint32_t M1 = 0xCD9E8D57u;
  static constexpr uint32_t W0 = 0x9E3779B9u;
  static constexpr uint32_t W1 = 0xBB67AE85u;

  // One 10-round block. ctr/key layouts follow the reference algorithm.
  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = static_cast<uint64_t>(M0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(M1) * ctr[2];
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += W0;
      key[1] += W1;
    }
    return ctr;
  }
};

namespace detail {

inline std::array<uint32_t, 2> seed_key(uint64_t seed) {
  return {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
}

// Two 32-bit words to one double in [0, 1) with 53 random bits.
inline double to_double(uint32_t hi, uint32_t lo) {
  const uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Sequential stream of variates for one (seed, domain, stream) triple.
// The counter encodes a 64-bit draw index, so streams never collide.
class Stream {
 public:
  Stream(uint64_t seed, Domain domain, uint32_t stream)
      : key_(detail::seed_key(seed)),
        domain_(static_cast<uint32_t>(domain)),
        stream_(stream) {}

  uint32_t next_u32() {
    if (avail_ == 0) refill();
    return buf_[--avail_];
  }

  uint64_t next_u64() {
    const uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() {
    const uint32_t hi = next_u32();
    const uint32_t lo = next_u32();
    return detail::to_double(hi, lo);
  }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

 private:
  void refill() {
    const std::array<uint32_t, 4> ctr = {
        static_cast<uint32_t>(index_), static_cast<uint32_t>(index_ >> 32),
        stream_, domain_};
    buf_ = Philox4x32::block(ctr, key_);
    ++index_;
    avail_ = 4;
  }

  std::array<uint32_t, 2> key_;
  uint32_t domain_;
  uint32_t stream_;
  uint64_t index_ = 0;
  std::array<uint32_t, 4> buf_{};
  int avail_ = 0;
};

// One uniform keyed by an unordered vertex pair. Symmetric in (i, j) and
// independent of the order pairs are visited, which is what makes cell-list
// sampling agree with exhaustive sampling draw for draw.
inline double pair_uniform(uint64_t seed, Domain domain, uint32_t stream,
                           uint32_t i, uint32_t j) {
  if (i > j) std::swap(i, j);
  const std::array<uint32_t, 4> ctr = {i, j, stream,
                                       static_cast<uint32_t>(domain)};
  const auto out = Philox4x32::block(ctr, detail::seed_key(seed));
  return detail::to_double(out[0], out[1]);
}

// Poisson sampler: product-of-uniforms inversion for small means, the PTRS
// transformed-rejection method (Hoermann) above it. Draw count from the
// stream varies per sample; streams are never shared across trials, so this
// stays reproducible.
inline uint64_t poisson(Stream& s, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("poisson: lambda must be finite and >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) {
    const double limit = std::exp(-lambda);
    uint64_t k = 0;
    double prod = s.next_double();
    while (prod > limit) {
      ++k;
      prod *= s.next_double();
    }
    return k;
  }
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = s.next_double() - 0.5;
    const double v = s.next_double();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    if (lhs <= kf * loglam - lambda - std::lgamma(kf + 1.0))
      return static_cast<uint64_t>(kf);
  }
}

}  // namespace softgeo::rng
