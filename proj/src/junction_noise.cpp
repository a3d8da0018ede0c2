#include "tunnelpairs/junction_noise.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tunnelpairs/constants.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/special_functions.hpp"

namespace tunnelpairs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kClampThreshold = 1e-9;

inline double s0_raw(double resistance, double temperature, double f) {
  if (f == 0.0) return 2.0 * kSI.k_B * temperature / resistance;
  const double x = kSI.h * f / (2.0 * kSI.k_B * temperature);
  return kSI.h * f / resistance * coth_stable(x);
}

}  // namespace

void validate(const Junction& j) {
  if (!(j.resistance > 0.0) || !std::isfinite(j.resistance)) {
    throw ConfigurationError("junction: resistance must be > 0");
  }
  if (!(j.temperature > 0.0) || !std::isfinite(j.temperature)) {
    throw ConfigurationError(
        "junction: temperature must be > 0 (use 1e-5 K for effective zero)");
  }
}

void validate(const Drive& d) {
  if (!(d.f0 > 0.0) || !std::isfinite(d.f0)) {
    throw ConfigurationError("drive: f0 must be > 0");
  }
  if (!(d.v_ac >= 0.0) || !std::isfinite(d.v_ac)) {
    throw ConfigurationError("drive: v_ac must be >= 0");
  }
  if (!std::isfinite(d.v_dc)) throw ConfigurationError("drive: v_dc not finite");
}

SidebandWeights::SidebandWeights(double z)
    : z_(z), cutoff_(sideband_cutoff(z)), positive_(bessel_j_sequence(cutoff_ + 1, z)) {}

double SidebandWeights::j(int n) const {
  const int an = n < 0 ? -n : n;
  const double v = positive_[static_cast<std::size_t>(an)];
  return (n < 0 && (an & 1)) ? -v : v;
}

double s0_equilibrium(const Junction& j, double f) {
  validate(j);
  return s0_raw(j.resistance, j.temperature, f);
}

double bose_einstein(double f, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("bose_einstein: temperature must be > 0");
  if (!(f > 0.0)) throw DomainError("bose_einstein: frequency must be > 0");
  return 1.0 / std::expm1(kSI.h * f / (kSI.k_B * temperature));
}

double drive_parameter(const Drive& d) { return kSI.e * d.v_ac / (kSI.h * d.f0); }

double photo_assisted_s(const Junction& j, const Drive& d, double f,
                        const SidebandWeights& w) {
  const double shift = kSI.e * d.v_dc / kSI.h;
  const int N = w.cutoff();
  double acc = 0.0;
  for (int n = -N; n <= N; ++n) {
    const double jn = w.j(n);
    const double weight = jn * jn;
    if (weight == 0.0) continue;
    const double fn = f + n * d.f0;
    acc += weight * (s0_raw(j.resistance, j.temperature, fn + shift) +
                     s0_raw(j.resistance, j.temperature, fn - shift));
  }
  return 0.5 * acc;
}

double photo_assisted_s(const Junction& j, const Drive& d, double f) {
  validate(j);
  validate(d);
  return photo_assisted_s(j, d, f, SidebandWeights(drive_parameter(d)));
}

double x_correlator(const Junction& j, const Drive& d, double f,
                    const SidebandWeights& w) {
  if (d.v_dc == 0.0 || d.v_ac == 0.0) return 0.0;
  const double shift = kSI.e * d.v_dc / kSI.h;
  const int N = w.cutoff();
  double acc = 0.0;
  for (int n = -N - 1; n <= N; ++n) {
    const double alpha = w.j(n) * w.j(n + 1);
    if (alpha == 0.0) continue;
    const double fn = f + n * d.f0;
    acc += alpha * (s0_raw(j.resistance, j.temperature, fn + shift) -
                    s0_raw(j.resistance, j.temperature, fn - shift));
  }
  return 0.5 * acc;
}

double x_correlator(const Junction& j, const Drive& d, double f) {
  validate(j);
  validate(d);
  return x_correlator(j, d, f, SidebandWeights(drive_parameter(d)));
}

double emission_noise(const Junction& j, const Drive& d, double f) {
  return photo_assisted_s(j, d, f) - kSI.h * std::abs(f) / j.resistance;
}

namespace {

double occupation_from_s(double s, double resistance, double f) {
  const double n = 0.5 * (s * resistance / (kSI.h * f) - 1.0);
  if (n < 0.0) {
    if (n < -kClampThreshold) {
      throw NumericalConsistencyError(
          "photon number " + std::to_string(n) + " at f = " + std::to_string(f) +
          " Hz: spectral density below the vacuum floor");
    }
    return 0.0;
  }
  return n;
}

}  // namespace

double photon_number_at(const Junction& j, const Drive& d, double f) {
  if (!(f > 0.0)) throw DomainError("photon_number: frequency must be > 0");
  return occupation_from_s(photo_assisted_s(j, d, f), j.resistance, f);
}

double noise_temperature(const Junction& j, double s) {
  return s * j.resistance / (2.0 * kSI.k_B);
}

void check_pair_configuration(const Drive& d, const DetectionBand& b1,
                              const DetectionBand& b2) {
  validate(d);
  validate(b1);
  validate(b2);
  if (std::abs(b1.f_center + b2.f_center - d.f0) > 1.0) {
    throw ConfigurationError("sum-frequency condition violated: f1 + f2 = " +
                             std::to_string(b1.f_center + b2.f_center) +
                             " Hz but f0 = " + std::to_string(d.f0) + " Hz");
  }
  if (b1.lower() < b2.upper() && b2.lower() < b1.upper()) {
    throw ConfigurationError("detection bands overlap");
  }
}

double c4(const Junction& j, const Drive& d, const DetectionBand& b1,
          const DetectionBand& b2) {
  validate(j);
  check_pair_configuration(d, b1, b2);
  const SidebandWeights w(drive_parameter(d));
  if (b1.policy == BandPolicy::center) {
    const double x = x_correlator(j, d, b1.f_center, w);
    return x * x;
  }
  return band_average(
      [&](double f) {
        const double x = x_correlator(j, d, f, w);
        return x * x;
      },
      b1);
}

double g2_kelvin2(const Junction& j, const Drive& d, const DetectionBand& b1,
                  const DetectionBand& b2) {
  const double scale = j.resistance / (2.0 * kSI.k_B);
  return c4(j, d, b1, b2) * scale * scale;
}

double photon_number(const Junction& j, const Drive& d, const DetectionBand& b) {
  validate(j);
  validate(d);
  validate(b);
  const SidebandWeights w(drive_parameter(d));
  auto at = [&](double f) {
    return occupation_from_s(photo_assisted_s(j, d, f, w), j.resistance, f);
  };
  if (b.policy == BandPolicy::center) return at(b.f_center);
  return band_average(at, b);
}

PairStats pair_stats(const Junction& j, const Drive& d, const DetectionBand& b1,
                     const DetectionBand& b2) {
  PairStats p;
  p.c4 = c4(j, d, b1, b2);
  const double scale = j.resistance / (2.0 * kSI.k_B);
  p.g2_kelvin2 = p.c4 * scale * scale;
  p.n1 = photon_number(j, d, b1);
  p.n2 = photon_number(j, d, b2);
  const double hh = kSI.h * kSI.h;
  p.covariance = p.c4 * j.resistance * j.resistance /
                 (4.0 * hh * b1.f_center * b2.f_center);
  // S_em(f) = 2 h f n / R, so C4 / (S_em1 S_em2) = covariance / (n1 n2).
  p.g2 = (p.n1 > 0.0 && p.n2 > 0.0) ? 1.0 + p.covariance / (p.n1 * p.n2) : kNaN;
  p.nrf = (p.n1 + p.n2 > 0.0)
              ? (p.n1 * (p.n1 + 1.0) + p.n2 * (p.n2 + 1.0) - 2.0 * p.covariance) /
                    (p.n1 + p.n2)
              : kNaN;
  if (p.n2 > 0.0) {
    p.p_pair_unclipped = (p.n1 * p.n2 + p.covariance) / p.n2;
    p.p_pair_given_2 = p.p_pair_unclipped > 1.0 ? 1.0 : p.p_pair_unclipped;
  } else {
    p.p_pair_unclipped = kNaN;
    p.p_pair_given_2 = kNaN;
  }
  return p;
}

double g2(const Junction& j, const Drive& d, const DetectionBand& b1,
          const DetectionBand& b2) {
  const PairStats p = pair_stats(j, d, b1, b2);
  if (std::isnan(p.g2)) {
    throw UndefinedStatisticError("g2: emission noise vanishes in a detection band");
  }
  return p.g2;
}

double pair_probability(const Junction& j, const Drive& d,
                        const DetectionBand& b1, const DetectionBand& b2) {
  const PairStats p = pair_stats(j, d, b1, b2);
  if (std::isnan(p.p_pair_given_2)) {
    throw UndefinedStatisticError("pair_probability: <n2> = 0");
  }
  return p.p_pair_given_2;
}

double nrf(const Junction& j, const Drive& d, const DetectionBand& b1,
           const DetectionBand& b2) {
  const PairStats p = pair_stats(j, d, b1, b2);
  if (std::isnan(p.nrf)) throw UndefinedStatisticError("nrf: <n1> + <n2> = 0");
  return p.nrf;
}

double pair_rate(const Junction& j, const Drive& d, const DetectionBand& b1,
                 const DetectionBand& b2, double bandwidth) {
  if (!(bandwidth >= 0.0)) throw DomainError("pair_rate: bandwidth must be >= 0");
  const PairStats p = pair_stats(j, d, b1, b2);
  if (std::isnan(p.p_pair_given_2)) {
    throw UndefinedStatisticError("pair_rate: <n2> = 0");
  }
  return p.n2 * p.p_pair_given_2 * bandwidth;
}

double intrinsic_c4_estimate(const Junction& j, double v_dc, double delta_f) {
  validate(j);
  if (!(v_dc >= 0.0)) throw DomainError("intrinsic_c4_estimate: v_dc must be >= 0");
  if (!(delta_f > 0.0)) throw DomainError("intrinsic_c4_estimate: delta_f must be > 0");
  const double e3 = kSI.e * kSI.e * kSI.e;
  return e3 * v_dc * delta_f * j.resistance / (kSI.k_B * kSI.k_B);
}

}  // namespace tunnelpairs
