#include "tunnelpairs/special_functions.hpp"

#include <algorithm>
#include <cmath>

#include "tunnelpairs/constants.hpp"

namespace tunnelpairs {

void validate(const DetectionBand& band) {
  if (!(band.bandwidth > 0.0) || !std::isfinite(band.bandwidth)) {
    throw ConfigurationError("detection band: bandwidth must be > 0");
  }
  if (!(band.lower() > 0.0) || !std::isfinite(band.f_center)) {
    throw ConfigurationError(
        "detection band: lower edge f_center - bandwidth/2 must be > 0");
  }
}

namespace {

// Leading two terms of the ascending series; adequate once (z/2)^2 < 1e-16.
std::vector<double> small_argument_sequence(int n_max, double z) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double half = 0.5 * z;
  double term = 1.0;  // (z/2)^n / n!
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) term *= half / n;
    out[static_cast<std::size_t>(n)] = term * (1.0 - half * half / (n + 1));
    if (term == 0.0) break;
  }
  return out;
}

}  // namespace

std::vector<double> bessel_j_sequence(int n_max, double z) {
  if (n_max < 0 || n_max > kMaxBesselOrder + 1) {
    throw DomainError("bessel_j: order out of supported range");
  }
  if (!std::isfinite(z) || std::abs(z) > kMaxBesselArgument) {
    throw DomainError("bessel_j: argument out of supported range");
  }
  const double az = std::abs(z);
  std::vector<double> out;
  if (az < 1e-8) {
    out = small_argument_sequence(n_max, az);
  } else {
    const int top = std::max(n_max, static_cast<int>(std::ceil(az)));
    int start = top + 25 + static_cast<int>(std::sqrt(160.0 * (top + 1)));
    start += start % 2;  // even, so the normalization sum picks even orders

    out.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    const double two_over_z = 2.0 / az;
    double next = 0.0;  // j_{k+1}
    double curr = 1.0;  // j_k
    double norm = 0.0;  // j_0 + 2 sum_{even k >= 2} j_k
    for (int k = start; k >= 1; --k) {
      if (k <= n_max) out[static_cast<std::size_t>(k)] = curr;
      if (k % 2 == 0) norm += 2.0 * curr;
      const double prev = k * two_over_z * curr - next;
      next = curr;
      curr = prev;
      if (std::abs(curr) > 1e250) {
        constexpr double kScale = 1e-250;
        curr *= kScale;
        next *= kScale;
        norm *= kScale;
        for (int i = k; i <= n_max; ++i) out[static_cast<std::size_t>(i)] *= kScale;
      }
    }
    out[0] = curr;
    norm += curr;
    for (double& v : out) v /= norm;
  }
  if (z < 0.0) {
    for (std::size_t n = 1; n < out.size(); n += 2) out[n] = -out[n];
  }
  return out;
}

double bessel_j(int n, double z) {
  if (n < -kMaxBesselOrder || n > kMaxBesselOrder) {
    throw DomainError("bessel_j: order out of supported range");
  }
  const int an = std::abs(n);
  const double value = bessel_j_sequence(an, z)[static_cast<std::size_t>(an)];
  return (n < 0 && an % 2 == 1) ? -value : value;
}

double coth_stable(double x) {
  if (x == 0.0) throw DomainError("coth_stable: x = 0");
  if (std::isnan(x)) throw DomainError("coth_stable: x is NaN");
  const double ax = std::abs(x);
  double r;
  if (ax < 1e-6) {
    r = 1.0 / ax + ax / 3.0;
  } else if (ax > 20.0) {
    r = 1.0;
  } else {
    r = 1.0 / std::tanh(ax);
  }
  return x < 0.0 ? -r : r;
}

const GaussLegendre16& gauss_legendre16() {
  static const GaussLegendre16 rule = [] {
    GaussLegendre16 g{};
    constexpr int n = 16;
    for (int i = 0; i < n / 2; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      g.nodes[static_cast<std::size_t>(i)] = -x;
      g.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
      g.weights[static_cast<std::size_t>(i)] = w;
      g.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return g;
  }();
  return rule;
}

}  // namespace tunnelpairs
