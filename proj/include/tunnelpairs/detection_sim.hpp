#pragma once

// Monte Carlo model of the two-band power-correlation measurement:
// correlated Gaussian band envelopes -> amplifier noise -> square-law
// detectors with a single-pole response -> digitizer -> channel crosstalk
// -> streaming G2 = <P1 P2> - <P1><P2>.
//
// Powers are Kelvin-referred throughout: a bin carrying spectral density S
// contributes S R / 2 k_B divided by the number of bins, so the mean detected
// power of a band is its average noise temperature.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tunnelpairs/band.hpp"
#include "tunnelpairs/junction_noise.hpp"

namespace tunnelpairs::sim {

using Matrix2 = std::array<std::array<double, 2>, 2>;
inline constexpr Matrix2 kIdentity2{{{1.0, 0.0}, {0.0, 1.0}}};

enum class SourceMode {
  junction,         // photo-assisted junction noise with pair correlations
  thermal_control,  // resistor in equilibrium at source_temperature, X = 0
};

struct McConfig {
  Junction junction{23.6, 0.020};
  Drive drive{16e-6, 22e-6, 11.6e9};
  DetectionBand band1{4.4e9, 0.65e9};
  DetectionBand band2{7.2e9, 0.38e9};
  int bins_per_band = 64;
  std::array<double, 2> amp_noise_temperature{5.0, 5.0};  // K
  double detector_time_constant = 1e-9;                   // s
  double sample_rate = 4e8;                               // Hz
  int oversample = 4;  // simulation samples per digitizer sample
  std::uint64_t n_windows = 1;
  std::uint64_t seed = 0;
  Matrix2 crosstalk = kIdentity2;
  SourceMode source_mode = SourceMode::junction;
  double source_temperature = 0.0;  // K, thermal_control only
};

void validate(const McConfig& cfg);

/// Frequency grid of one detection window. Both bands share the bin width,
/// and band-2 bin k sits at f0 - (band-1 bin k), so every bin has its pair
/// partner exactly. The grid spans the narrower of the two bands and the
/// bin width divides the sample rate, so a window holds an integer number of
/// digitizer samples.
struct BinGrid {
  int bins = 0;
  double bin_width = 0.0;           // Hz
  int samples_per_window = 0;       // digitizer samples
  int oversample = 0;
  int internal_samples = 0;         // samples_per_window * oversample
  double internal_rate = 0.0;       // Hz
  std::vector<double> f1;           // band-1 bin centers, ascending
  std::vector<double> f2;           // partners f0 - f1[k]

  double span() const { return bins * bin_width; }
};

BinGrid make_grid(const McConfig& cfg);

/// Kelvin-referred per-bin spectra of the source, indexed by pair k.
struct BinSpectrum {
  std::vector<double> t1;  // S(f1[k]) R / 2 k_B
  std::vector<double> t2;  // S(f2[k]) R / 2 k_B
  std::vector<double> x;   // X(f1[k], f2[k]) R / 2 k_B
};

BinSpectrum bin_spectrum(const McConfig& cfg, const BinGrid& grid);

/// Precomputed per-bin mixing coefficients. Construction checks that every
/// pair covariance [[t1, x], [x, t2]] is positive semidefinite and throws
/// ModelViolationError otherwise.
class SynthesisPlan {
 public:
  explicit SynthesisPlan(const BinSpectrum& spectrum);
  std::size_t bins() const { return sigma1_.size(); }
  double sigma1(std::size_t k) const { return sigma1_[k]; }
  double mix(std::size_t k) const { return mix_[k]; }
  double sigma2(std::size_t k) const { return sigma2_[k]; }

 private:
  std::vector<double> sigma1_;  // sqrt(t1 / B)
  std::vector<double> mix_;     // x / t1
  std::vector<double> sigma2_;  // sqrt((t2 - x^2/t1) / B)
};

/// Complex bin amplitudes of one window, indexed by pair k.
struct BandAmplitudes {
  std::vector<std::complex<double>> band1;
  std::vector<std::complex<double>> band2;
};

/// Source amplitudes: <|a1|^2> = t1/B, <|a2|^2> = t2/B, <a1 a2> = x/B.
/// Pure function of (plan, seed, window).
BandAmplitudes synthesize_bins(const SynthesisPlan& plan, std::uint64_t seed,
                               std::uint64_t window);

/// Adds independent amplifier noise of the given temperatures per band.
void add_amplifier_noise(BandAmplitudes& amps, const std::array<double, 2>& t_amp,
                         std::uint64_t seed, std::uint64_t window);

struct Envelope {
  std::vector<std::complex<double>> samples;  // one period of a periodic signal
  double rate = 0.0;                          // Hz
};

/// Baseband envelopes (one window) from bin amplitudes.
std::pair<Envelope, Envelope> envelopes_from_bins(const BandAmplitudes& amps,
                                                  const BinGrid& grid);

/// Source envelopes for one window, without amplifier noise.
std::pair<Envelope, Envelope> synthesize_envelopes(const McConfig& cfg,
                                                   std::uint64_t window_index);

/// Square-law detector: |envelope|^2 through a single-pole low-pass with the
/// given time constant (periodic steady state, unit DC gain), then decimated
/// to `sample_rate`. envelope.rate must be an integer multiple of sample_rate.
std::vector<double> detect_power(const Envelope& envelope, double time_constant,
                                 double sample_rate);

/// (p1', p2') = m (p1, p2) sample by sample.
std::pair<std::vector<double>, std::vector<double>> apply_crosstalk(
    std::span<const double> p1, std::span<const double> p2, const Matrix2& m);

/// Everything two runs must share for a spur calibration to transfer.
struct ChainSignature {
  Matrix2 crosstalk = kIdentity2;
  double detector_time_constant = 0.0;
  double sample_rate = 0.0;
  int bins_per_band = 0;
  int oversample = 0;
  bool operator==(const ChainSignature&) const = default;
};

struct McResult {
  double mean_p1 = 0.0;  // K
  double mean_p2 = 0.0;  // K
  double var_p1 = 0.0;   // K^2
  double var_p2 = 0.0;   // K^2
  double g2_est = 0.0;   // K^2
  double g2_err = 0.0;   // K^2, 1 sigma
  std::uint64_t n_samples_used = 0;
  double effective_samples = 0.0;
  SourceMode source_mode = SourceMode::junction;
  ChainSignature chain;
};

struct EstimatorOptions {
  // Single-pole response of the detector that produced the streams; 0 means
  // samples are treated as independent.
  double time_constant = 0.0;
  double sample_rate = 0.0;
  // > 0: streams are concatenated independent blocks of this length and the
  // error bar comes from the spread of block moments instead.
  std::size_t block_length = 0;
};

/// G2 with a 1-sigma statistical error. Throws InputError on length mismatch
/// or fewer than two samples.
McResult estimate_g2(std::span<const double> p1, std::span<const double> p2,
                     const EstimatorOptions& opts = {});

/// Whole chain over cfg.n_windows independent windows. Deterministic in
/// (cfg, seed) and independent of `threads`.
McResult run_experiment(const McConfig& cfg, int threads = 1);

/// Expected crosstalk-free G2 of the simulated chain, from the analytic
/// correlator at the bin frequencies and the detector transfer function.
/// Equals junction_noise g2_kelvin2 for a flat X and an instantaneous detector.
double predicted_g2_kelvin2(const McConfig& cfg);

/// Expected mean detected power per band, including amplifier noise.
std::array<double, 2> predicted_mean_power(const McConfig& cfg);

/// Expected variance of the detected power per band, before crosstalk.
std::array<double, 2> predicted_power_variance(const McConfig& cfg);

struct SpurCorrected {
  double g2 = 0.0;
  double g2_err = 0.0;
  double spur = 0.0;  // subtracted baseline
};

/// Removes the crosstalk baseline measured on a thermal control from a
/// measurement taken through the same chain. The control baseline is scaled
/// by (var_m1 + var_m2) / (var_c1 + var_c2); errors add in quadrature.
SpurCorrected calibrate_spur(const McResult& control, const McResult& measurement);

}  // namespace tunnelpairs::sim
