#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
// A draw is a pure function of (key, counter), so Monte Carlo streams can be
// addressed by (seed, window, bin, draw) without shared state.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "tunnelpairs/constants.hpp"

namespace tunnelpairs {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

inline PhiloxKey philox_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Uniform on the open interval (0, 1).
inline double uniform_open(std::uint32_t bits) {
  return (static_cast<double>(bits) + 0.5) * 0x1p-32;
}

namespace detail {

inline const std::array<std::complex<double>, 1024>& phasor_table() {
  static const auto table = [] {
    std::array<std::complex<double>, 1024> t{};
    for (int i = 0; i < 1024; ++i) t[static_cast<std::size_t>(i)] = std::polar(1.0, 2.0 * kPi * i / 1024.0);
    return t;
  }();
  return table;
}

}  // namespace detail

// exp(i 2 pi u) for u = uniform_open(bits): the top 10 bits pick a table
// entry, the remaining angle (< 2 pi / 1024) is applied by its Taylor series,
// truncated below 1e-16.
inline std::complex<double> unit_phasor(std::uint32_t bits) {
  const double d = 2.0 * kPi * ((static_cast<double>(bits & 0x3FFFFFu) + 0.5) * 0x1p-32);
  const double d2 = d * d;
  const double c = 1.0 - d2 * (0.5 - d2 * (1.0 / 24.0 - d2 * (1.0 / 720.0)));
  const double s = d * (1.0 - d2 * (1.0 / 6.0 - d2 * (1.0 / 120.0 - d2 * (1.0 / 5040.0))));
  return detail::phasor_table()[bits >> 22] * std::complex<double>(c, s);
}

// Standard circular complex Gaussian (E|z|^2 = 1) from two 32-bit words.
inline std::complex<double> complex_normal(std::uint32_t a, std::uint32_t b) {
  return std::sqrt(-std::log(uniform_open(a))) * unit_phasor(b);
}

// Two independent complex normals for one (seed, window, bin, draw) address.
inline std::array<std::complex<double>, 2> complex_normal_pair(PhiloxKey key,
                                                               std::uint64_t window,
                                                               std::uint32_t bin,
                                                               std::uint32_t draw) {
  const PhiloxCounter out = philox4x32_10(
      {static_cast<std::uint32_t>(window), static_cast<std::uint32_t>(window >> 32), bin, draw},
      key);
  return {complex_normal(out[0], out[1]), complex_normal(out[2], out[3])};
}

}  // namespace tunnelpairs
