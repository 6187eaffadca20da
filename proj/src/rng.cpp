#include "sfg/rng.hpp"

#include <cmath>

namespace sfg {

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 2>& key,
                                        std::array<std::uint32_t, 4> counter) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t k0 = key[0];
  std::uint32_t k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
    const std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ k0,
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ k1,
        static_cast<std::uint32_t>(p0),
    };
    counter = next;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return counter;
}

double uniform_from_bits(std::uint64_t bits) {
  // Top 52 bits, centered on the lattice.  One bit of resolution is given up
  // so the extreme values (2^-53 and 1 - 2^-53) are exactly representable:
  // on the finer 2^-53 lattice the top value 1 - 2^-54 would round to 1.0
  // and poison quantile transforms.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double normal_quantile(double p) {
  // Wichura's algorithm AS 241, PPND16.
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) *
                      r +
                  4.5921953931549871457e4) *
                     r +
                 1.3731693765509461125e4) *
                    r +
                1.9715909503065514427e3) *
                   r +
               1.3314166789178437745e2) *
                  r +
              3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
             2.41780725177450611770e-1) *
                r +
            1.27045825245236838258e0) *
               r +
           3.64784832476320460504e0) *
              r +
          5.76949722146069140550e0) *
             r +
         4.63033784615654529590e0) *
            r +
        1.42343711074968357734e0;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) *
                r +
            1.48103976427480074590e-1) *
               r +
           6.89767334985100004550e-1) *
              r +
          1.67638483018380384940e0) *
             r +
         2.05319162663775882187e0) *
            r +
        1.0;
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
             1.24266094738807843860e-3) *
                r +
            2.65321895265761230930e-2) *
               r +
           2.96560571828504891230e-1) *
              r +
          1.78482653991729133580e0) *
             r +
         5.46378491116411436990e0) *
            r +
        6.65790464350110377720e0;
    const double den =
        ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
             1.84631831751005468180e-5) *
                r +
            7.86869131145613259100e-4) *
               r +
           1.48753612908506148525e-2) *
              r +
          1.36929880922735805310e-1) *
             r +
         5.99832206555887937690e-1) *
            r +
        1.0;
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

std::array<std::uint64_t, 2> NoiseStream::words(std::uint32_t path,
                                                std::uint32_t step,
                                                std::uint32_t block) const {
  const std::array<std::uint32_t, 4> ctr = {path, step, block, domain_};
  const std::array<std::uint32_t, 4> out = philox4x32(key_, ctr);
  return {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
          (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
}

double NoiseStream::normal(std::uint32_t path, std::uint32_t step,
                           std::uint32_t channel) const {
  const auto w = words(path, step, channel >> 1);
  return normal_quantile(uniform_from_bits(w[channel & 1]));
}

double NoiseStream::uniform(std::uint32_t path, std::uint32_t step,
                            std::uint32_t channel) const {
  const auto w = words(path, step, channel >> 1);
  return uniform_from_bits(w[channel & 1]);
}

void NoiseStream::fill_normals(std::uint32_t path, std::uint32_t step,
                               double* out, int count) const {
  for (int c = 0; c < count; c += 2) {
    const auto w = words(path, step, static_cast<std::uint32_t>(c >> 1));
    out[c] = normal_quantile(uniform_from_bits(w[0]));
    if (c + 1 < count) out[c + 1] = normal_quantile(uniform_from_bits(w[1]));
  }
}

double DrawStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * noise_.uniform(0, index_++, 0);
}

}  // namespace sfg
