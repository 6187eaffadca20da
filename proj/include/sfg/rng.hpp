#pragma once

#include <array>
#include <cstdint>

namespace sfg {

// Counter-based random numbers.  Every variate is a pure function of
// (seed, path, step, channel), so two simulations that share a seed consume
// bitwise-identical noise regardless of which feedback laws they evaluate,
// and path order / batching cannot change any draw.  The generator is the
// standard Philox-4x32 block cipher with 10 rounds; Gaussians come from the
// inverse normal CDF applied to a 53-bit uniform, which is reproducible
// across platforms (no rejection loops, no libm distribution calls).

/// One Philox-4x32-10 block: encrypt `counter` under `key`.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 2>& key,
                                        std::array<std::uint32_t, 4> counter);

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximations, |error| < 1e-15 over (0,1)).
double normal_quantile(double p);

/// Map a 64-bit word to the open interval (0,1) on the centered 2^-52
/// lattice {(k + 1/2) 2^-52}; both endpoints of the interval are unreachable
/// even after rounding, so downstream quantile transforms never see 0 or 1.
double uniform_from_bits(std::uint64_t bits);

/// Stream of standard normal variates addressed by (path, step, channel).
/// Distinct `domain` values give independent streams under the same seed;
/// domain 0 is reserved for Brownian increments.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed, std::uint32_t domain = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        domain_(domain) {}

  /// Standard normal for a single channel.
  double normal(std::uint32_t path, std::uint32_t step,
                std::uint32_t channel) const;

  /// Uniform on (0,1) for a single channel.
  double uniform(std::uint32_t path, std::uint32_t step,
                 std::uint32_t channel) const;

  /// Fill channels [0, count) for one (path, step); one Philox block serves
  /// two channels.
  void fill_normals(std::uint32_t path, std::uint32_t step, double* out,
                    int count) const;

 private:
  std::array<std::uint64_t, 2> words(std::uint32_t path, std::uint32_t step,
                                     std::uint32_t block) const;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t domain_;
};

/// Sequential deterministic draws for fixture and perturbation generation.
/// `stream` separates independent consumers under one seed.
class DrawStream {
 public:
  DrawStream(std::uint64_t seed, std::uint32_t stream)
      : noise_(seed, /*domain=*/0x80000000u | stream) {}

  double normal() { return noise_.normal(0, index_++, 0); }
  /// Uniform on (lo, hi).
  double uniform(double lo, double hi);

 private:
  NoiseStream noise_;
  std::uint32_t index_ = 0;
};

}  // namespace sfg
