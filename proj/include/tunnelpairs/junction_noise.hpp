#pragma once

// Closed-form noise and photon statistics of an ac+dc biased tunnel junction.
//
// All quantities are SI: spectral densities in A^2/Hz, voltages in V,
// frequencies in Hz, temperatures in K. Kelvin-referred values (noise
// temperature S R / 2 k_B) only appear in functions whose name says so.

#include <vector>

#include "tunnelpairs/band.hpp"

namespace tunnelpairs {

struct Junction {
  double resistance = 0.0;   // ohm
  double temperature = 0.0;  // electron temperature, K (> 0; use 1e-5 K for "zero")
};

struct Drive {
  double v_dc = 0.0;  // V
  double v_ac = 0.0;  // V, amplitude at the sample
  double f0 = 0.0;    // Hz, excitation frequency
};

void validate(const Junction& j);
void validate(const Drive& d);

/// Equilibrium current noise (h f / R) coth(h f / 2 k_B T). Even in f; the
/// f = 0 limit is 2 k_B T / R.
double s0_equilibrium(const Junction& j, double f);

/// Bose-Einstein occupation 1 / (exp(h f / k_B T) - 1).
double bose_einstein(double f, double temperature);

/// Bessel argument e V_ac / h f0.
double drive_parameter(const Drive& d);

/// Photo-assisted spectral density
///   S(f) = 1/2 sum_n J_n(z)^2 [S0(f + n f0 + eV/h) + S0(f + n f0 - eV/h)].
double photo_assisted_s(const Junction& j, const Drive& d, double f);

/// Two-frequency correlator X(f, f0 - f)
///   = sum_n J_n(z) J_{n+1}(z) / 2 [S0(f + n f0 + eV/h) - S0(f + n f0 - eV/h)].
/// Real, odd in V_dc, zero at V_dc = 0 or V_ac = 0.
double x_correlator(const Junction& j, const Drive& d, double f);

/// Emission noise S(f) - h|f|/R.
double emission_noise(const Junction& j, const Drive& d, double f);

/// Photon occupation (S R / h f - 1) / 2 at a single frequency. Roundoff
/// negatives down to -1e-9 are clamped to 0; anything lower throws
/// NumericalConsistencyError.
double photon_number_at(const Junction& j, const Drive& d, double f);

/// Noise temperature S R / 2 k_B.
double noise_temperature(const Junction& j, double s);

/// Throws ConfigurationError unless b1.f_center + b2.f_center == d.f0 (1 Hz)
/// and the bands do not overlap.
void check_pair_configuration(const Drive& d, const DetectionBand& b1,
                              const DetectionBand& b2);

/// C4 = X(f1, f0 - f1)^2, reduced over band 1 according to b1.policy.
double c4(const Junction& j, const Drive& d, const DetectionBand& b1,
          const DetectionBand& b2);

/// C4 expressed in K^2 through the (R / 2 k_B)^2 convention.
double g2_kelvin2(const Junction& j, const Drive& d, const DetectionBand& b1,
                  const DetectionBand& b2);

/// Occupation reduced over the band according to b.policy.
double photon_number(const Junction& j, const Drive& d, const DetectionBand& b);

/// Everything the pair statistics need, evaluated once.
struct PairStats {
  double n1 = 0.0;
  double n2 = 0.0;
  double covariance = 0.0;      // <dn1 dn2> = C4 R^2 / (4 h^2 f1 f2)
  double c4 = 0.0;              // (A^2/Hz)^2
  double g2_kelvin2 = 0.0;      // K^2
  double g2 = 0.0;              // NaN when either emission vanishes
  double nrf = 0.0;             // NaN when n1 + n2 == 0
  double p_pair_given_2 = 0.0;  // clipped to [0, 1]; NaN when n2 == 0
  double p_pair_unclipped = 0.0;

  /// The pairing model assumes at most one photon per detector window.
  bool low_occupation() const { return n1 <= 0.3 && n2 <= 0.3; }
};

PairStats pair_stats(const Junction& j, const Drive& d, const DetectionBand& b1,
                     const DetectionBand& b2);

/// 1 + C4 / (S_em(f1) S_em(f2)). Throws UndefinedStatisticError when either
/// emission noise is not positive.
double g2(const Junction& j, const Drive& d, const DetectionBand& b1,
          const DetectionBand& b2);

/// P(1|2) = <n1 n2> / <n2>, clipped to 1.
double pair_probability(const Junction& j, const Drive& d,
                        const DetectionBand& b1, const DetectionBand& b2);

/// Noise reduction factor with chaotic-light single-mode variances.
double nrf(const Junction& j, const Drive& d, const DetectionBand& b1,
           const DetectionBand& b2);

/// <n2> P(1|2) times bandwidth, in pairs per second.
double pair_rate(const Junction& j, const Drive& d, const DetectionBand& b1,
                 const DetectionBand& b2, double bandwidth);

/// Order-of-magnitude intrinsic fourth cumulant e^3 V df R / k_B^2, in K^2.
double intrinsic_c4_estimate(const Junction& j, double v_dc, double delta_f);

}  // namespace tunnelpairs

namespace tunnelpairs {

/// J_n(z) for n in [-(N+1), N+1] with N = sideband_cutoff(z), so that a
/// sweep over frequency can reuse one Bessel evaluation.
class SidebandWeights {
 public:
  explicit SidebandWeights(double z);

  double z() const { return z_; }
  int cutoff() const { return cutoff_; }
  double j(int n) const;  // |n| <= cutoff + 1

 private:
  double z_;
  int cutoff_;
  std::vector<double> positive_;  // J_0 .. J_{N+1}
};

double photo_assisted_s(const Junction& j, const Drive& d, double f,
                        const SidebandWeights& w);
double x_correlator(const Junction& j, const Drive& d, double f,
                    const SidebandWeights& w);

}  // namespace tunnelpairs
