#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "tunnelpairs/band.hpp"
#include "tunnelpairs/errors.hpp"

namespace tunnelpairs {

inline constexpr int kMaxBesselOrder = 200;
inline constexpr double kMaxBesselArgument = 50.0;

/// Bessel function of the first kind J_n(z) for integer order.
///
/// Evaluated by normalized backward recurrence (Miller's algorithm).
/// Supported domain is |n| <= 200, |z| <= 50; outside it a DomainError is
/// thrown. Negative orders use J_{-n}(z) = (-1)^n J_n(z).
double bessel_j(int n, double z);

/// J_0(z), ..., J_{n_max}(z) from a single recurrence pass.
std::vector<double> bessel_j_sequence(int n_max, double z);

/// Truncation order for sums over Bessel-weighted sidebands.
inline int sideband_cutoff(double z) {
  return static_cast<int>(std::ceil(std::abs(z))) + 25;
}

/// coth(x) without cancellation near 0 or overflow for large |x|.
/// Exactly odd. Throws DomainError at x == 0.
double coth_stable(double x);

/// 16-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre16 {
  std::array<double, 16> nodes;
  std::array<double, 16> weights;
};
const GaussLegendre16& gauss_legendre16();

/// Mean of `integrand` over [f_c - bw/2, f_c + bw/2]. Exact for polynomials
/// up to degree 31. The band policy is ignored here.
template <std::invocable<double> F>
double band_average(F&& integrand, const DetectionBand& band) {
  validate(band);
  const auto& rule = gauss_legendre16();
  const double half = 0.5 * band.bandwidth;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double f = band.f_center + half * rule.nodes[i];
    const double value = static_cast<double>(integrand(f));
    if (!std::isfinite(value)) {
      throw EvaluationError("band_average: integrand not finite at f = " +
                            std::to_string(f));
    }
    acc += rule.weights[i] * value;
  }
  return 0.5 * acc;
}

}  // namespace tunnelpairs
