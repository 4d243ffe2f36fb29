#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Streams are addressed by a 128-bit counter {c0, c1, c2, c3} under a 64-bit
// key. The Monte Carlo uses key = seed, c0/c1 = trial index, c2 = stream id,
// c3 = block index, and turns every block into two 53-bit uniforms.

#include <array>
#include <cmath>
#include <cstdint>

namespace hotrep {

inline constexpr const char* kRngAlgorithm = "philox4x32-10";

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Sequential uniforms from one (seed, trial, stream) substream.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32), stream, 0u} {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    if (pos_ == 2) {
      buf_ = Philox4x32::block(ctr_, key_);
      ++ctr_[3];
      pos_ = 0;
    }
    const std::uint64_t bits =
        (std::uint64_t{buf_[2 * pos_ + 1]} << 32) | std::uint64_t{buf_[2 * pos_]};
    ++pos_;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  /// Number of Bernoulli(p) trials up to and including the first success,
  /// by inversion. p must lie in (0, 1].
  std::uint64_t geometric(double p) { return geometric_scaled(p >= 1.0 ? 0.0 : 1.0 / std::log1p(-p)); }

  /// Same, with the precomputed factor 1 / log1p(-p) (0 for p = 1).
  std::uint64_t geometric_scaled(double inv_log1p_neg_p) {
    const double u = uniform();
    if (inv_log1p_neg_p == 0.0) return 1;
    const double k = std::floor(std::log1p(-u) * inv_log1p_neg_p);
    if (!(k < 9.0e18)) return UINT64_MAX;
    return 1 + static_cast<std::uint64_t>(k);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 2;
};

}  // namespace hotrep
