#pragma once
// Counter-based random numbers: Philox4x32-10 keyed by the run seed, with the
// counter built from (stream, step). Any draw can be regenerated from its
// coordinates alone, so results do not depend on evaluation order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fwdrel {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

inline Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += W0;
      key[1] += W1;
    }
    const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
    const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stream identifiers reserve the low 24 bits for the idiosyncratic index and
// the rest for the outer (common-noise) path index.
inline constexpr std::uint64_t stream_id(std::uint64_t outer, std::uint64_t idio) {
  return (outer << 24) | (idio & 0xFFFFFFull);
}

// Domain tags keep independent uses of one run seed apart.
enum class RngDomain : std::uint64_t { Brownian = 1, Population = 2, Auxiliary = 3 };

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, RngDomain domain = RngDomain::Brownian)
      : seed_(seed) {
    const std::uint64_t k = splitmix64(seed ^ (std::uint64_t(domain) * 0xA24BAED4963EE407ull));
    key_ = {std::uint32_t(k), std::uint32_t(k >> 32)};
  }

  std::uint64_t seed() const { return seed_; }

  std::array<std::uint32_t, 4> raw(std::uint64_t stream, std::uint64_t step) const {
    return philox4x32_10({std::uint32_t(step), std::uint32_t(step >> 32), std::uint32_t(stream),
                          std::uint32_t(stream >> 32)},
                         key_);
  }

  // Two uniforms in the open interval (0,1) with 53-bit resolution.
  std::array<double, 2> uniform2(std::uint64_t stream, std::uint64_t step) const {
    const auto r = raw(stream, step);
    return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
  }

  // Two independent standard normals (Box-Muller).
  std::array<double, 2> normal2(std::uint64_t stream, std::uint64_t step) const {
    const auto u = uniform2(stream, step);
    const double rad = std::sqrt(-2.0 * std::log(u[0]));
    const double ang = 2.0 * std::numbers::pi * u[1];
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  double normal(std::uint64_t stream, std::uint64_t step) const { return normal2(stream, step)[0]; }

 private:
  static double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = ((std::uint64_t(a) << 32) | b) >> 11;
    return (double(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  Philox4x32Key key_;
};

}  // namespace fwdrel
