#include "tunnelpairs/detection_sim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "tunnelpairs/constants.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/philox.hpp"
#include "tunnelpairs/streaming_moments.hpp"

namespace tunnelpairs::sim {

namespace {

constexpr std::uint64_t kWindowsPerChunk = 1024;
constexpr double kPsdTolerance = 1e-12;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Out-of-place inverse DFT of fixed length. The input starts zeroed and
// only bin slots are written, so it never needs clearing. FFTW's planner is
// not thread-safe, execution is.
class InverseDft {
 public:
  explicit InverseDft(int n) {
    const auto len = static_cast<std::size_t>(n);
    in_ = fftw_alloc_complex(len);
    out_ = fftw_alloc_complex(len);
    std::fill(input(), input() + n, std::complex<double>{});
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(n, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  ~InverseDft() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  InverseDft(const InverseDft&) = delete;
  InverseDft& operator=(const InverseDft&) = delete;

  std::complex<double>* input() { return reinterpret_cast<std::complex<double>*>(in_); }
  const std::complex<double>* data() const {
    return reinterpret_cast<const std::complex<double>*>(out_);
  }
  void execute() { fftw_execute(plan_); }

 private:
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// Smallest integer >= n with no prime factor above 7.
int smooth_at_least(int n) {
  for (int k = std::max(n, 1);; ++k) {
    int r = k;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return k;
  }
}

int dft_index(int offset, int m) { return ((offset % m) + m) % m; }

// Band 1 bin k sits at offset k - B/2, its partner at the mirrored offset, so
// the pair frequencies sum to a constant. Only offset differences within a
// band matter for detected power.
void place_bins(std::span<const std::complex<double>> band1,
                std::span<const std::complex<double>> band2, InverseDft& dft1,
                InverseDft& dft2, int m) {
  const int half = static_cast<int>(band1.size()) / 2;
  for (std::size_t k = 0; k < band1.size(); ++k) {
    const int q = static_cast<int>(k) - half;
    dft1.input()[dft_index(q, m)] = band1[k];
    dft2.input()[dft_index(-q, m)] = band2[k];
  }
}

// Single-pole smoothing y_i = (1 - alpha) y_{i-1} + alpha |a_i|^2 in periodic
// steady state, read out every `decimation` samples. Both the steady-state
// start value and the step between read-outs are weighted sums, so the
// sequential recursion runs only over the decimated samples.
class PowerDetector {
 public:
  PowerDetector(int n, double alpha, int decimation)
      : n_(n), decimation_(decimation), power_(static_cast<std::size_t>(n)),
        wrap_weight_(static_cast<std::size_t>(n)), step_weight_(static_cast<std::size_t>(decimation)) {
    const double keep = 1.0 - alpha;
    const double period_gain = 1.0 / (1.0 - std::pow(keep, n));
    for (int i = 0; i < n; ++i) {
      wrap_weight_[static_cast<std::size_t>(i)] = alpha * std::pow(keep, n - 1 - i) * period_gain;
    }
    for (int m = 0; m < decimation; ++m) step_weight_[static_cast<std::size_t>(m)] = alpha * std::pow(keep, m);
    keep_ = keep;
    keep_step_ = std::pow(keep, decimation);
    alpha_ = alpha;
  }

  void run(const std::complex<double>* env, double* out) {
    double* p = power_.data();
    for (int i = 0; i < n_; ++i) p[i] = std::norm(env[i]);
    double y = 0.0;  // value at the last sample of the previous period
    for (int i = 0; i < n_; ++i) y += wrap_weight_[static_cast<std::size_t>(i)] * p[i];
    y = keep_ * y + alpha_ * p[0];
    out[0] = y;
    const int outputs = (n_ + decimation_ - 1) / decimation_;
    for (int j = 1; j < outputs; ++j) {
      const int i = j * decimation_;
      double acc = 0.0;
      for (int m = 0; m < decimation_; ++m) acc += step_weight_[static_cast<std::size_t>(m)] * p[i - m];
      y = keep_step_ * y + acc;
      out[j] = y;
    }
  }

 private:
  int n_, decimation_;
  std::vector<double> power_, wrap_weight_, step_weight_;
  double keep_ = 0.0, keep_step_ = 0.0, alpha_ = 0.0;
};

double smoothing_coefficient(double rate, double time_constant) {
  return -std::expm1(-1.0 / (rate * time_constant));
}

// |H(q)|^2 of the discrete single-pole filter at DFT offset q of an n-point period.
double transfer_power(double alpha, int q, int n) {
  const double keep = 1.0 - alpha;
  const double c = std::cos(2.0 * kPi * q / n);
  return alpha * alpha / (1.0 - 2.0 * keep * c + keep * keep);
}

void synthesize_into(const SynthesisPlan& plan, PhiloxKey key, std::uint64_t window,
                     BandAmplitudes& out) {
  const std::size_t bins = plan.bins();
  out.band1.resize(bins);
  out.band2.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const auto z = complex_normal_pair(key, window, static_cast<std::uint32_t>(k), 0);
    const std::complex<double> a1 = plan.sigma1(k) * z[0];
    out.band1[k] = a1;
    out.band2[k] = plan.mix(k) * std::conj(a1) + plan.sigma2(k) * z[1];
  }
}

struct PartialMoments {
  CovarianceAccumulator samples;
  VectorMoments<3> blocks;  // per block: mean p1, mean p2, mean p1 p2

  void merge(const PartialMoments& o) {
    samples.merge(o.samples);
    blocks.merge(o.blocks);
  }
};

void push_block(PartialMoments& pm, const double* p1, const double* p2, std::size_t len) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    s1 += p1[i];
    s2 += p2[i];
  }
  const double inv = 1.0 / static_cast<double>(len);
  const double m1 = s1 * inv, m2 = s2 * inv;
  double q1 = 0.0, q2 = 0.0, q12 = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d1 = p1[i] - m1, d2 = p2[i] - m2;
    q1 += d1 * d1;
    q2 += d2 * d2;
    q12 += d1 * d2;
  }
  pm.samples.merge(CovarianceAccumulator::from_moments(len, m1, m2, q1, q2, q12));
  pm.blocks.push({m1, m2, q12 * inv + m1 * m2});
}

McResult finalize(const PartialMoments& pm) {
  McResult r;
  const auto& s = pm.samples;
  r.mean_p1 = s.mean_x();
  r.mean_p2 = s.mean_y();
  r.var_p1 = s.variance_x();
  r.var_p2 = s.variance_y();
  r.g2_est = s.covariance();
  r.n_samples_used = s.count();
  const double gaussian_var = r.var_p1 * r.var_p2 + r.g2_est * r.g2_est;
  const std::uint64_t nb = pm.blocks.count();
  if (nb >= 2) {
    // Delta method: G2 = m12 - m1 m2 has gradient (-m2, -m1, 1).
    const std::array<double, 3> grad{-r.mean_p2, -r.mean_p1, 1.0};
    double var = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t k = 0; k < 3; ++k) var += grad[i] * grad[k] * pm.blocks.covariance(i, k);
    }
    var /= static_cast<double>(nb);
    r.g2_err = std::sqrt(var);
    r.effective_samples = var > 0.0 ? gaussian_var / var : 0.0;
  }
  return r;
}

ChainSignature signature_of(const McConfig& cfg) {
  return {cfg.crosstalk, cfg.detector_time_constant, cfg.sample_rate, cfg.bins_per_band,
          cfg.oversample};
}

}  // namespace

void validate(const McConfig& cfg) {
  validate(cfg.junction);
  check_pair_configuration(cfg.drive, cfg.band1, cfg.band2);
  if (cfg.bins_per_band < 8) throw ConfigurationError("mc: bins_per_band must be >= 8");
  if (!(cfg.sample_rate > 0.0) || !std::isfinite(cfg.sample_rate)) {
    throw ConfigurationError("mc: sample_rate must be > 0");
  }
  if (!(cfg.detector_time_constant > 0.0) || !std::isfinite(cfg.detector_time_constant)) {
    throw ConfigurationError("mc: detector_time_constant must be > 0");
  }
  if (cfg.oversample < 1) throw ConfigurationError("mc: oversample must be >= 1");
  if (cfg.n_windows < 1) throw ConfigurationError("mc: n_windows must be >= 1");
  for (double t : cfg.amp_noise_temperature) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigurationError("mc: amplifier noise temperature must be >= 0");
    }
  }
  for (const auto& row : cfg.crosstalk) {
    for (double v : row) {
      if (!std::isfinite(v)) throw ConfigurationError("mc: crosstalk entries must be finite");
    }
  }
  if (cfg.source_mode == SourceMode::thermal_control &&
      (!(cfg.source_temperature > 0.0) || !std::isfinite(cfg.source_temperature))) {
    throw ConfigurationError("mc: thermal control needs source_temperature > 0");
  }
}

BinGrid make_grid(const McConfig& cfg) {
  validate(cfg);
  BinGrid g;
  g.bins = cfg.bins_per_band;
  const double span = std::min(cfg.band1.bandwidth, cfg.band2.bandwidth);
  // Bins may not be wider than span / B; round the window length up to a
  // length the FFT handles without large prime factors.
  g.samples_per_window = smooth_at_least(
      static_cast<int>(std::ceil(g.bins * cfg.sample_rate / span * (1.0 - 1e-12))));
  g.bin_width = cfg.sample_rate / g.samples_per_window;
  // |a|^2 spans 2B - 1 DFT offsets; keep the period long enough to hold them.
  const int min_oversample = (2 * g.bins + g.samples_per_window - 1) / g.samples_per_window;
  g.oversample = std::max(cfg.oversample, min_oversample);
  g.internal_samples = g.samples_per_window * g.oversample;
  g.internal_rate = cfg.sample_rate * g.oversample;
  g.f1.resize(static_cast<std::size_t>(g.bins));
  g.f2.resize(static_cast<std::size_t>(g.bins));
  for (int k = 0; k < g.bins; ++k) {
    const double f = cfg.band1.f_center + (k - 0.5 * (g.bins - 1)) * g.bin_width;
    g.f1[static_cast<std::size_t>(k)] = f;
    g.f2[static_cast<std::size_t>(k)] = cfg.drive.f0 - f;
  }
  return g;
}

BinSpectrum bin_spectrum(const McConfig& cfg, const BinGrid& grid) {
  BinSpectrum s;
  const std::size_t bins = grid.f1.size();
  s.t1.resize(bins);
  s.t2.resize(bins);
  s.x.assign(bins, 0.0);
  if (cfg.source_mode == SourceMode::thermal_control) {
    const Junction resistor{cfg.junction.resistance, cfg.source_temperature};
    for (std::size_t k = 0; k < bins; ++k) {
      s.t1[k] = noise_temperature(resistor, s0_equilibrium(resistor, grid.f1[k]));
      s.t2[k] = noise_temperature(resistor, s0_equilibrium(resistor, grid.f2[k]));
    }
    return s;
  }
  const Junction& j = cfg.junction;
  const SidebandWeights w(drive_parameter(cfg.drive));
  for (std::size_t k = 0; k < bins; ++k) {
    s.t1[k] = noise_temperature(j, photo_assisted_s(j, cfg.drive, grid.f1[k], w));
    s.t2[k] = noise_temperature(j, photo_assisted_s(j, cfg.drive, grid.f2[k], w));
    s.x[k] = noise_temperature(j, x_correlator(j, cfg.drive, grid.f1[k], w));
  }
  return s;
}

SynthesisPlan::SynthesisPlan(const BinSpectrum& spectrum) {
  const std::size_t bins = spectrum.t1.size();
  if (spectrum.t2.size() != bins || spectrum.x.size() != bins || bins == 0) {
    throw InputError("synthesis: spectrum arrays must be non-empty and of equal length");
  }
  const double inv_bins = 1.0 / static_cast<double>(bins);
  sigma1_.resize(bins);
  mix_.resize(bins);
  sigma2_.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double t1 = spectrum.t1[k], t2 = spectrum.t2[k], x = spectrum.x[k];
    if (!(t1 > 0.0) || !(t2 >= 0.0) || !std::isfinite(t1) || !std::isfinite(t2) ||
        !std::isfinite(x)) {
      throw ModelViolationError("synthesis: bin " + std::to_string(k) +
                                " has a non-positive or non-finite spectral density");
    }
    if (x * x > t1 * t2 * (1.0 + kPsdTolerance)) {
      throw ModelViolationError("synthesis: pair covariance of bin " + std::to_string(k) +
                                " is not positive semidefinite (X^2 > S1 S2)");
    }
    const double residual = std::max(0.0, t2 - x * x / t1);
    sigma1_[k] = std::sqrt(t1 * inv_bins);
    mix_[k] = x / t1;
    sigma2_[k] = std::sqrt(residual * inv_bins);
  }
}

BandAmplitudes synthesize_bins(const SynthesisPlan& plan, std::uint64_t seed,
                               std::uint64_t window) {
  BandAmplitudes out;
  synthesize_into(plan, philox_key(seed), window, out);
  return out;
}

void add_amplifier_noise(BandAmplitudes& amps, const std::array<double, 2>& t_amp,
                         std::uint64_t seed, std::uint64_t window) {
  const std::size_t bins = amps.band1.size();
  if (bins == 0) return;
  const double inv_bins = 1.0 / static_cast<double>(bins);
  const double s1 = std::sqrt(t_amp[0] * inv_bins), s2 = std::sqrt(t_amp[1] * inv_bins);
  const PhiloxKey key = philox_key(seed);
  for (std::size_t k = 0; k < bins; ++k) {
    const auto z = complex_normal_pair(key, window, static_cast<std::uint32_t>(k), 1);
    amps.band1[k] += s1 * z[0];
    amps.band2[k] += s2 * z[1];
  }
}

std::pair<Envelope, Envelope> envelopes_from_bins(const BandAmplitudes& amps,
                                                  const BinGrid& grid) {
  const int m = grid.internal_samples;
  if (amps.band1.size() != static_cast<std::size_t>(grid.bins) ||
      amps.band2.size() != static_cast<std::size_t>(grid.bins)) {
    throw InputError("envelopes: amplitude count does not match the grid");
  }
  InverseDft d1(m), d2(m);
  place_bins(amps.band1, amps.band2, d1, d2, m);
  d1.execute();
  d2.execute();
  Envelope e1{{d1.data(), d1.data() + m}, grid.internal_rate};
  Envelope e2{{d2.data(), d2.data() + m}, grid.internal_rate};
  return {std::move(e1), std::move(e2)};
}

std::pair<Envelope, Envelope> synthesize_envelopes(const McConfig& cfg,
                                                   std::uint64_t window_index) {
  const BinGrid grid = make_grid(cfg);
  const SynthesisPlan plan(bin_spectrum(cfg, grid));
  return envelopes_from_bins(synthesize_bins(plan, cfg.seed, window_index), grid);
}

std::vector<double> detect_power(const Envelope& envelope, double time_constant,
                                 double sample_rate) {
  if (!(time_constant > 0.0)) throw InputError("detect_power: time_constant must be > 0");
  if (!(sample_rate > 0.0) || !(envelope.rate > 0.0)) {
    throw InputError("detect_power: rates must be > 0");
  }
  if (envelope.samples.size() < 16) {
    throw InputError("detect_power: need at least 16 envelope samples");
  }
  const double ratio = envelope.rate / sample_rate;
  const int decimation = static_cast<int>(std::lround(ratio));
  if (decimation < 1 || std::abs(ratio - decimation) > 1e-9 * ratio) {
    throw InputError("detect_power: envelope rate must be an integer multiple of sample_rate");
  }
  const int n = static_cast<int>(envelope.samples.size());
  std::vector<double> out(static_cast<std::size_t>((n + decimation - 1) / decimation));
  PowerDetector detector(n, smoothing_coefficient(envelope.rate, time_constant), decimation);
  detector.run(envelope.samples.data(), out.data());
  return out;
}

std::pair<std::vector<double>, std::vector<double>> apply_crosstalk(
    std::span<const double> p1, std::span<const double> p2, const Matrix2& m) {
  if (p1.size() != p2.size()) throw InputError("apply_crosstalk: length mismatch");
  for (const auto& row : m) {
    for (double v : row) {
      if (!std::isfinite(v)) throw InputError("apply_crosstalk: matrix not finite");
    }
  }
  std::vector<double> q1(p1.size()), q2(p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    q1[i] = m[0][0] * p1[i] + m[0][1] * p2[i];
    q2[i] = m[1][0] * p1[i] + m[1][1] * p2[i];
  }
  return {std::move(q1), std::move(q2)};
}

McResult estimate_g2(std::span<const double> p1, std::span<const double> p2,
                     const EstimatorOptions& opts) {
  if (p1.size() != p2.size()) throw InputError("estimate_g2: stream length mismatch");
  if (p1.size() < 2) throw InputError("estimate_g2: need at least two samples");
  PartialMoments pm;
  if (opts.block_length > 0) {
    if (p1.size() % opts.block_length != 0 || p1.size() / opts.block_length < 2) {
      throw InputError("estimate_g2: streams must hold at least two whole blocks");
    }
    for (std::size_t start = 0; start < p1.size(); start += opts.block_length) {
      push_block(pm, p1.data() + start, p2.data() + start, opts.block_length);
    }
    return finalize(pm);
  }
  for (std::size_t i = 0; i < p1.size(); ++i) pm.samples.push(p1[i], p2[i]);
  McResult r = finalize(pm);
  // Products of two single-pole filtered streams decorrelate as r^(2|lag|).
  double factor = 1.0;
  if (opts.time_constant > 0.0 && opts.sample_rate > 0.0) {
    const double rho = std::exp(-1.0 / (opts.sample_rate * opts.time_constant));
    factor = (1.0 - rho * rho) / (1.0 + rho * rho);
  }
  r.effective_samples = static_cast<double>(r.n_samples_used) * factor;
  r.g2_err = std::sqrt((r.var_p1 * r.var_p2 + r.g2_est * r.g2_est) / r.effective_samples);
  return r;
}

McResult run_experiment(const McConfig& cfg, int threads) {
  const BinGrid grid = make_grid(cfg);
  BinSpectrum spectrum = bin_spectrum(cfg, grid);
  const SynthesisPlan source_check(spectrum);
  // Source and amplifier noise are independent Gaussians, so each band's sum
  // is drawn in one step from the combined covariance.
  for (auto& t : spectrum.t1) t += cfg.amp_noise_temperature[0];
  for (auto& t : spectrum.t2) t += cfg.amp_noise_temperature[1];
  const SynthesisPlan plan(spectrum);
  const PhiloxKey key = philox_key(cfg.seed);
  const int m = grid.internal_samples;
  const int per_window = grid.samples_per_window;
  const double alpha = smoothing_coefficient(grid.internal_rate, cfg.detector_time_constant);
  const Matrix2 mix = cfg.crosstalk;
  const bool identity = mix == kIdentity2;

  const std::uint64_t n_chunks = (cfg.n_windows + kWindowsPerChunk - 1) / kWindowsPerChunk;
  std::vector<PartialMoments> partial(n_chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      InverseDft d1(m), d2(m);
      PowerDetector detector(m, alpha, grid.oversample);
      BandAmplitudes amps;
      std::vector<double> p1(static_cast<std::size_t>(per_window)),
          p2(static_cast<std::size_t>(per_window));
      for (std::uint64_t c = next++; c < n_chunks; c = next++) {
        PartialMoments& pm = partial[c];
        const std::uint64_t end = std::min(cfg.n_windows, (c + 1) * kWindowsPerChunk);
        for (std::uint64_t w = c * kWindowsPerChunk; w < end; ++w) {
          synthesize_into(plan, key, w, amps);
          place_bins(amps.band1, amps.band2, d1, d2, m);
          d1.execute();
          d2.execute();
          detector.run(d1.data(), p1.data());
          detector.run(d2.data(), p2.data());
          if (!identity) {
            for (int i = 0; i < per_window; ++i) {
              const double a = p1[static_cast<std::size_t>(i)], b = p2[static_cast<std::size_t>(i)];
              p1[static_cast<std::size_t>(i)] = mix[0][0] * a + mix[0][1] * b;
              p2[static_cast<std::size_t>(i)] = mix[1][0] * a + mix[1][1] * b;
            }
          }
          push_block(pm, p1.data(), p2.data(), p1.size());
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_chunks;
    }
  };

  const int n_threads =
      std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::uint64_t>(n_chunks, 256))));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  PartialMoments total;
  for (const auto& pm : partial) total.merge(pm);
  McResult r = finalize(total);
  r.source_mode = cfg.source_mode;
  r.chain = signature_of(cfg);
  return r;
}

namespace {

double weighted_pair_sum(const std::vector<double>& a, const std::vector<double>& b,
                         const BinGrid& grid, double alpha) {
  const int bins = grid.bins;
  std::vector<double> h2(static_cast<std::size_t>(2 * bins - 1));
  for (int q = -(bins - 1); q <= bins - 1; ++q) {
    h2[static_cast<std::size_t>(q + bins - 1)] = transfer_power(alpha, q, grid.internal_samples);
  }
  double acc = 0.0;
  for (int k = 0; k < bins; ++k) {
    for (int l = 0; l < bins; ++l) {
      acc += a[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(l)] *
             h2[static_cast<std::size_t>(k - l + bins - 1)];
    }
  }
  return acc / (static_cast<double>(bins) * bins);
}

}  // namespace

double predicted_g2_kelvin2(const McConfig& cfg) {
  const BinGrid grid = make_grid(cfg);
  const BinSpectrum s = bin_spectrum(cfg, grid);
  const double alpha = smoothing_coefficient(grid.internal_rate, cfg.detector_time_constant);
  return weighted_pair_sum(s.x, s.x, grid, alpha);
}

std::array<double, 2> predicted_mean_power(const McConfig& cfg) {
  const BinGrid grid = make_grid(cfg);
  const BinSpectrum s = bin_spectrum(cfg, grid);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < s.t1.size(); ++k) {
    m1 += s.t1[k];
    m2 += s.t2[k];
  }
  const double inv = 1.0 / static_cast<double>(s.t1.size());
  return {m1 * inv + cfg.amp_noise_temperature[0], m2 * inv + cfg.amp_noise_temperature[1]};
}

std::array<double, 2> predicted_power_variance(const McConfig& cfg) {
  const BinGrid grid = make_grid(cfg);
  BinSpectrum s = bin_spectrum(cfg, grid);
  for (auto& t : s.t1) t += cfg.amp_noise_temperature[0];
  for (auto& t : s.t2) t += cfg.amp_noise_temperature[1];
  const double alpha = smoothing_coefficient(grid.internal_rate, cfg.detector_time_constant);
  return {weighted_pair_sum(s.t1, s.t1, grid, alpha), weighted_pair_sum(s.t2, s.t2, grid, alpha)};
}

SpurCorrected calibrate_spur(const McResult& control, const McResult& measurement) {
  if (control.source_mode != SourceMode::thermal_control) {
    throw InputError("calibrate_spur: control run must use a thermal source");
  }
  if (!(control.chain == measurement.chain)) {
    throw InputError("calibrate_spur: control and measurement use different detection chains");
  }
  if (!(control.var_p1 > 0.0) || !(control.var_p2 > 0.0)) {
    throw InputError("calibrate_spur: control run has no power fluctuations");
  }
  // Symmetric leakage eps adds eps (var1 + var2) to the covariance.
  const double scale =
      (measurement.var_p1 + measurement.var_p2) / (control.var_p1 + control.var_p2);
  SpurCorrected out;
  out.spur = scale * control.g2_est;
  out.g2 = measurement.g2_est - out.spur;
  out.g2_err = std::hypot(measurement.g2_err, scale * control.g2_err);
  return out;
}

}  // namespace tunnelpairs::sim
